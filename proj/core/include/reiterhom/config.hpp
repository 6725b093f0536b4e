#pragma once

// Problem configuration files: INI-style text with the sections
//
//   nfunction = { kind = "power", p = 2.0 }   (or a [nfunction] section)
//   [coefficient]  name = lin1d, plus catalog parameters such as p
//   [domain]       dim, lower, upper, f (an expression in x and y)
//   [solver]       mesh sizes, eps list, tolerances, sampling
//
// Unknown keys are rejected so that typos do not silently fall back to
// defaults.

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reiterhom/coeff.hpp"
#include "reiterhom/mesh.hpp"
#include "reiterhom/nfunc.hpp"

namespace reiterhom::config {

/// Parses an arithmetic expression in the variables x and y (and the
/// constant pi) with + - * / ^, parentheses and the functions sin, cos, tan,
/// exp, log, sqrt, abs. Throws Errc::config on syntax errors.
std::function<double(fields::Point)> parse_expression(const std::string& text);

/// {kind = "power", p = 2} style declaration; kinds power (p, scale),
/// power_log (p) and exp_minus_one.
nfunc::NFunction parse_nfunction(const std::map<std::string, std::string>& fields);
nfunc::NFunction parse_nfunction_inline(const std::string& text);

struct SolverSettings {
  int macro_n = 1024;
  int cell_n = 256;
  /// Y-cell resolution of nested solves; 0 uses cell_n.
  int cell_n_y = 0;
  std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125};
  /// Fine meshes use about fine_factor / eps^2 cells per unit length.
  int fine_factor = 16;
  double tol = 1e-9;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  int recon_n = 32;
  int recon_cell_n = 64;
  /// Y resolution of the reconstruction cells; 0 uses recon_cell_n.
  int recon_cell_n_y = 0;
  int table_points = 17;
  int table_points_r = 9;
  double table_margin = 0.25;
  int jobs = 1;

  int y_cells() const noexcept { return cell_n_y > 0 ? cell_n_y : cell_n; }
  int recon_y_cells() const noexcept { return recon_cell_n_y > 0 ? recon_cell_n_y : recon_cell_n; }
};

struct ProblemConfig {
  std::string origin;
  std::optional<nfunc::NFunction> nfunction;
  std::string coefficient = "lin1d";
  std::map<std::string, double> params;
  int dim = 1;
  fields::Point lower{0.0, 0.0};
  fields::Point upper{1.0, 1.0};
  std::string f = "1";
  SolverSettings solver;

  /// Catalog coefficient with the declared N-function as Phi.
  coeff::Coefficient build_coefficient() const;
  std::function<double(fields::Point)> rhs() const { return parse_expression(f); }
  fields::Mesh macro_mesh() const;
  /// Consistency checks (positive sizes, decreasing eps list, 2D limits).
  void check() const;
};

ProblemConfig parse(std::istream& in, const std::string& origin = "<stream>");
ProblemConfig load(const std::string& path);

/// "0.25,0.125" or "1/4,1/8" -> numbers.
std::vector<double> parse_list(const std::string& text);

}  // namespace reiterhom::config

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "reiterhom/cell.hpp"

namespace reiterhom::cell {

/// Tabulated effective flux q(r, xi) on a tensor grid with multilinear
/// interpolation. Values are stored r-slowest: ((ir * n0 + i0) * n1 + i1).
class FluxTable {
 public:
  FluxTable(int dim, std::vector<double> r_grid, std::array<std::vector<double>, 2> xi_grid, std::vector<Vec> q);

  static FluxTable from_function(int dim, std::vector<double> r_grid, std::array<std::vector<double>, 2> xi_grid,
                                 const std::function<Vec(double, Vec)>& q);

  int dim() const noexcept { return dim_; }
  const std::vector<double>& r_grid() const noexcept { return r_; }
  const std::vector<double>& xi_grid(int axis) const noexcept { return xi_[axis]; }
  const std::vector<Vec>& values() const noexcept { return q_; }
  std::size_t index(std::size_t ir, std::size_t i0, std::size_t i1 = 0) const noexcept {
    return (ir * xi_[0].size() + i0) * xi_[1].size() + i1;
  }
  const Vec& at(std::size_t ir, std::size_t i0, std::size_t i1 = 0) const noexcept { return q_[index(ir, i0, i1)]; }

  struct Query {
    Vec q{0.0, 0.0};
    /// Slopes of the interpolant in the cell holding the query (difference
    /// quotients with step equal to the grid spacing).
    Mat dq_dxi{};
    Vec dq_dr{0.0, 0.0};
    bool clamped = false;
  };
  /// Out-of-range arguments are clamped to the grid and flagged. A table
  /// with a single r node is constant in r.
  Query evaluate(double r, Vec xi) const;
  Vec operator()(double r, Vec xi) const { return evaluate(r, xi).q; }

  /// Free-form provenance written into the CSV metadata block.
  std::map<std::string, std::string> metadata;

 private:
  int dim_;
  std::vector<double> r_;
  std::array<std::vector<double>, 2> xi_;
  std::vector<Vec> q_;
};

/// CSV `r,xi_1[,xi_2],q_1[,q_2]` preceded by a commented metadata block.
void write_csv(std::ostream& out, const FluxTable& table);
FluxTable read_csv_table(std::istream& in);

struct TableOptions {
  CellOptions cell;
  int jobs = 1;
};

/// q at every grid node by nested cell solves; nodes run in parallel and
/// each node uses its own solver so the result does not depend on `jobs`.
/// Fluxes that ignore zeta are solved once per xi and copied along r.
FluxTable tabulate_flux(const coeff::Coefficient& c, std::vector<double> r_grid,
                        std::array<std::vector<double>, 2> xi_grid, const fields::Mesh& mesh_y,
                        const fields::Mesh& mesh_z, const TableOptions& options = {});

/// n points evenly spaced on [lo, hi] (one point at lo when n == 1).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace reiterhom::cell

#pragma once

// Flux maps a(y, z, zeta, lambda), their metadata and the sampling validator
// for the structural hypotheses.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reiterhom/meanvalue.hpp"
#include "reiterhom/nfunc.hpp"

namespace reiterhom::coeff {

using Vec = std::array<double, 2>;
using Mat = std::array<Vec, 2>;

enum class StructureClass { periodic_periodic, ap_periodic, ap_binf, periodic_binf };

std::string_view to_string(StructureClass cls) noexcept;

/// Flux value with its derivatives in lambda and zeta. Unused components
/// (dimension 1) are zero.
struct FluxValue {
  Vec a{0.0, 0.0};
  Mat da_dlambda{};
  Vec da_dzeta{0.0, 0.0};
};

using FluxFn = std::function<FluxValue(std::span<const double> y, std::span<const double> z, double zeta,
                                       std::span<const double> lambda)>;

struct Constants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
  double c5 = 1.0;
};

/// Immutable problem definition. Cells are (0, cell_length_y)^d and
/// (0, cell_length_z)^d; almost periodic y-dependence is carried on a long
/// periodic window.
struct Coefficient {
  std::string name;
  int dim = 1;
  StructureClass structure = StructureClass::periodic_periodic;
  nfunc::NFunction phi = nfunc::NFunction::power(2.0);
  nfunc::NFunction psi = nfunc::NFunction::power(2.0);
  Constants constants;
  std::function<double(double)> h;
  double h_min = 0.5;
  double cell_length_y = 1.0;
  double cell_length_z = 1.0;
  FluxFn flux;

  bool zeta_dependent = false;
  bool linear_in_gradient = false;
  /// H5 data: translations |xi| <= rho change the flux by at most eta.
  double eta = 1.0;
  double rho = 1e-3;
  /// Oscillating test functions w(y) v(z) shipped with the problem.
  std::vector<meanvalue::TensorTerm> dictionary;
  /// Free parameters the problem was built with (for reports).
  std::map<std::string, double> params;

  Vec operator()(std::span<const double> y, std::span<const double> z, double zeta,
                 std::span<const double> lambda) const {
    return flux(y, z, zeta, lambda).a;
  }
  /// theta(zeta) = Phi~^{-1}(Phi(h(|zeta|))).
  double theta(double zeta) const;
};

/// Names known to builtin_problem.
std::vector<std::string> catalog();

/// Catalog problem; `params` overrides declared parameters (e.g. p for plap2d).
Coefficient builtin_problem(const std::string& name, const std::map<std::string, double>& params = {});

/// The non-monotone flux a = -lambda with otherwise lin1d-like metadata.
Coefficient planted_counterexample();

/// Flux used inside the cell problems. On concrete representatives this is
/// the coefficient's own flux.
FluxFn effective_integrand(const Coefficient& c);

struct HypothesisResult {
  std::string name;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
  /// (y..., z..., zeta, lambda..., zeta', lambda'...) of the worst sample.
  std::vector<double> witness;
};

struct HypothesisReport {
  std::string problem;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<HypothesisResult> results;

  bool all_pass() const noexcept;
  const HypothesisResult* find(std::string_view name) const noexcept;
};

/// Sampling bound for zeta and each lambda component.
inline constexpr double kSampleBound = 10.0;

/// Checks H1-H6 on `samples` scrambled Sobol tuples; deterministic in
/// (samples, seed). Failures are reported, never thrown.
HypothesisReport validate(const Coefficient& c, std::size_t samples, std::uint64_t seed);

}  // namespace reiterhom::coeff

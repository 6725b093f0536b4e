#pragma once

#include <array>
#include <span>
#include <vector>

#include "reiterhom/algebra.hpp"
#include "reiterhom/multiscale.hpp"

namespace reiterhom::meanvalue {

/// Mean value M(u). Trigonometric bases use the zero-frequency coefficient,
/// cell grids their nodal average, callables a periodic rectangle rule; a
/// decaying core never contributes.
double mean(const AlgebraRep& u);

/// coeff * w(y) * v(z)
struct TensorTerm {
  AlgebraRep y;
  AlgebraRep z;
  double coeff = 1.0;
};

/// Sum of coeff * M(w) * M(v) over the terms.
double reiterated_mean(std::span<const TensorTerm> terms);

/// Average of u over the ball of radius r around center, by adaptive
/// Gauss-Kronrod quadrature.
double ergodic_average(const AlgebraRep& u, double r, std::span<const double> center);

/// max over the centers of |ergodic_average(u, r, c) - mean(u)|.
double ergodic_deviation(const AlgebraRep& u, double r, std::span<const std::array<double, 2>> centers);

/// int_Omega M_y M_z (u0 f) dx over the box of `domain`.
double limit_pairing(const fields::MultiscaleField& u0, const fields::MultiscaleField& f,
                     const fields::Mesh& domain);

struct SigmaTestReport {
  std::vector<double> eps;
  std::vector<double> lhs;
  double rhs = 0.0;
  std::vector<double> gap;

  /// Last gap below the first one, or both at most `floor`.
  bool gap_decreasing(double floor = 0.0) const;
};

/// Pairs u_eps = trace(u0, eps, eps^2) with f^eps on the mesh for every eps
/// and compares with the limit pairing. Requires n >= 4 / eps^2 cells per unit
/// length for the smallest eps.
SigmaTestReport sigma_test(const fields::MultiscaleField& u0, const fields::MultiscaleField& f,
                           const fields::Mesh& mesh, std::span<const double> eps_list);

}  // namespace reiterhom::meanvalue

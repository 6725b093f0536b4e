#pragma once

// N-function (Young function) calculus: evaluation, complementary functions,
// growth-class detection and the scalar inequalities used by the solvers.

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace reiterhom::nfunc {

enum class Kind { power, power_log, exp_minus_one, tabulated, conjugate };

std::string_view to_string(Kind kind) noexcept;

/// A Young function Phi(t) = int_0^t phi(s) ds on [0, inf).
///
/// Instances are immutable and cheap to copy (shared implementation).
/// Closed forms are evaluated exactly; a tabulated density is interpolated by
/// a monotone (PCHIP) spline whose antiderivative is integrated exactly.
class NFunction {
 public:
  struct Impl;

  /// Phi(t) = t^p / p.
  static NFunction power(double p);
  /// Phi(t) = scale * t^p.
  static NFunction power(double p, double scale);
  /// Phi(t) = t^p ln(1 + t), p >= 1.
  static NFunction power_log(double p);
  /// Phi(t) = e^t - 1.
  static NFunction exp_minus_one();
  /// Density samples phi(t_i); t must start at 0, be strictly increasing and
  /// have at least four points, phi must be nondecreasing with phi(0) = 0.
  static NFunction tabulated(std::vector<double> t, std::vector<double> phi);

  Kind kind() const noexcept;
  /// Exponent p of power / power_log kinds, NaN otherwise.
  double exponent() const noexcept;
  /// Multiplier of the power kind, NaN otherwise.
  double scale() const noexcept;
  /// Largest admissible argument (finite only for tabulated data).
  double upper_limit() const noexcept;

  double operator()(double t) const;
  double density(double t) const;
  /// Generalized inverse of the density, sup{t : phi(t) <= s} up to bisection accuracy.
  double density_inverse(double s) const;
  /// Inverse of Phi on [0, inf).
  double inverse(double value) const;

  std::string describe() const;

 private:
  explicit NFunction(std::shared_ptr<const Impl> impl);
  friend NFunction complementary(const NFunction& nf);

  std::shared_ptr<const Impl> impl_;
};

/// Phi(t); throws Errc::range outside a tabulated range and Errc::domain for t < 0.
double evaluate(const NFunction& nf, double t);

/// Fenchel conjugate sup_s (s t - Phi(s)). Power kinds pair in closed form;
/// the conjugate of a conjugate returns the original function.
NFunction complementary(const NFunction& nf);

/// Inverse of the complementary function, evaluated without building it.
double complementary_inverse(const NFunction& nf, double value);

/// theta = complementary_inverse(Phi(h_min)); requires 0 < h_min < 1.
double coercivity_constant(const NFunction& nf, double h_min);

/// `points` geometrically spaced values from lo to hi (inclusive).
std::vector<double> dyadic_grid(double lo, double hi, std::size_t points);

/// Grid used when no explicit grid is supplied: 200 points on [1e-3, 1e3].
std::vector<double> default_grid();

struct GrowthReport {
  bool delta2 = false;
  double delta2_t0 = 0.0;
  double delta2_k = 0.0;
  bool delta_prime = false;
  double delta_prime_t0 = 0.0;
  double delta_prime_beta = 0.0;
  double simonenko_lo = 0.0;  // inf of t phi(t) / Phi(t) over the grid
  double simonenko_hi = 0.0;  // sup of the same ratio
};

/// Growth classification on a finite grid.
///
/// Delta_2 holds when some pair (t0, k), k in {2.1, 4, 8, 16, 32}, satisfies
/// Phi(2t) <= k Phi(t) for every grid point t >= t0. Delta' is decided the
/// same way over pairs of grid points, Phi(ts) <= beta Phi(t) Phi(s) for all
/// t, s >= t0. The threshold t0 is restricted to the lower half of the grid
/// (t0 at most the geometric midpoint) so that a witness always covers the
/// upper decades. Non-finite values count as violations.
GrowthReport growth_report(const NFunction& nf, std::span<const double> grid);

inline constexpr double kGrowthConstants[] = {2.1, 4.0, 8.0, 16.0, 32.0};

/// Outcome of the scalar inequalities
///   t phi(t) / Phi(t) >= 1   and   Phi~(phi(t)) <= t phi(t) <= Phi(2t)
/// checked pointwise on a grid.
struct PropertyCheck {
  bool holds = true;
  double min_index = 0.0;         // min of t phi / Phi
  double max_young_excess = 0.0;  // max of Phi~(phi(t)) - t phi(t), relative
  double max_doubling_excess = 0.0;  // max of t phi(t) - Phi(2t), relative
  double worst_t = 0.0;
};

PropertyCheck check_properties(const NFunction& nf, std::span<const double> grid);

/// Structural invariants of an N-function sampled on a grid; returns a list
/// of human-readable violations (empty when all hold).
std::vector<std::string> check_invariants(const NFunction& nf, std::span<const double> grid);

}  // namespace reiterhom::nfunc

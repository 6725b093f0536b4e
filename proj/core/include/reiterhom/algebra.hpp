#pragma once

// Concrete representatives of functions in the algebras the engine supports:
// periodic functions on a cell, almost periodic trigonometric polynomials and
// functions converging at infinity.

#include <array>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace reiterhom::meanvalue {

using CellCallable = std::function<double(std::span<const double>)>;

/// cos_coef * cos(omega . y) + sin_coef * sin(omega . y)
struct TrigTerm {
  std::array<double, 2> omega{0.0, 0.0};
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

/// Frequencies closer than this are considered equal.
inline constexpr double kFrequencyTolerance = 1e-12;

class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<TrigTerm> terms);
  static TrigPoly constant(double c);

  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }
  double operator()(std::span<const double> y) const noexcept;
  /// Coefficient of the zero frequency.
  double zero_mode() const noexcept;
  bool is_constant() const noexcept;
  /// Expands the product with the product-to-sum identities.
  TrigPoly product(const TrigPoly& other) const;

 private:
  std::vector<TrigTerm> terms_;
};

/// Values on a periodic tensor grid of (0, length)^dim with n points per axis,
/// interpolated multilinearly.
struct CellGrid {
  int dim = 1;
  int n = 0;
  double length = 1.0;
  std::vector<double> values;

  double operator()(std::span<const double> y) const noexcept;
};

enum class AlgebraClass { periodic, almost_periodic, b_infinity };

/// A representative u = base + core, where the base lies in the algebra
/// named by the class and the core (optional) decays at infinity. Functions
/// converging at infinity have a constant base equal to their limit.
class AlgebraRep {
 public:
  using Base = std::variant<TrigPoly, CellGrid, CellCallable>;

  static AlgebraRep constant(double c, int dim = 1);
  /// Trigonometric polynomial whose frequencies are multiples of 2 pi / period.
  static AlgebraRep periodic(TrigPoly poly, int dim = 1, double period = 1.0);
  static AlgebraRep periodic(CellGrid grid);
  static AlgebraRep periodic(CellCallable fn, int dim = 1, double period = 1.0);
  static AlgebraRep almost_periodic(TrigPoly poly, int dim = 1);
  /// limit + core(y); core must be below 1e-8 outside the ball of `radius`.
  static AlgebraRep b_infinity(double limit, CellCallable core, double radius, int dim = 1);

  AlgebraClass algebra_class() const noexcept { return cls_; }
  int dim() const noexcept { return dim_; }
  double period() const noexcept { return period_; }
  const Base& base() const noexcept { return base_; }
  const CellCallable& core() const noexcept { return core_; }
  double core_radius() const noexcept { return radius_; }
  bool has_core() const noexcept { return static_cast<bool>(core_); }

  double operator()(std::span<const double> y) const;
  double base_value(std::span<const double> y) const;

  friend AlgebraRep product(const AlgebraRep& a, const AlgebraRep& b);

 private:
  AlgebraRep(AlgebraClass cls, int dim, double period, Base base);

  AlgebraClass cls_;
  int dim_;
  double period_;
  Base base_;
  CellCallable core_;
  double radius_ = 0.0;
};

/// Pointwise product, staying inside the supported representations.
AlgebraRep product(const AlgebraRep& a, const AlgebraRep& b);

}  // namespace reiterhom::meanvalue

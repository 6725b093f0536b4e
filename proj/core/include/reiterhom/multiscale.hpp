#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "reiterhom/algebra.hpp"
#include "reiterhom/field.hpp"

namespace reiterhom::fields {

using meanvalue::AlgebraRep;

/// Macroscopic factor g(x), optionally restricted to a box.
struct XFactor {
  std::function<double(Point)> fn;
  std::optional<std::array<Point, 2>> domain;
};

/// coeff * g(x) * w(y) * v(z); a missing factor is the constant 1.
struct SeparableTerm {
  double coeff = 1.0;
  std::optional<XFactor> x;
  std::optional<AlgebraRep> y;
  std::optional<AlgebraRep> z;
};

/// Geometry of a periodic sampling grid over one cell variable.
struct CellGridShape {
  int dim = 1;
  int n = 1;
  double length = 1.0;

  std::size_t size() const noexcept { return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
  std::array<double, 2> node(std::size_t k) const noexcept;
};

/// Values u(x_i, y_j, z_k) on nodes of a bounded x-mesh times periodic y- and
/// z-grids; evaluation is multilinear in every block. Index order is
/// (i * ny + j) * nz + k.
struct TabulatedTerm {
  Mesh x_mesh;
  CellGridShape y;
  CellGridShape z;
  std::vector<double> values;

  double operator()(Point x, std::span<const double> yv, std::span<const double> zv) const;
  double at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values[(i * y.size() + j) * z.size() + k];
  }
};

/// A function of (x, y, z) given as a finite sum of separable and tabulated
/// terms. Cell variables y and z have the same dimension as x.
class MultiscaleField {
 public:
  explicit MultiscaleField(int dim);

  static MultiscaleField constant(int dim, double c);
  static MultiscaleField separable(int dim, std::optional<XFactor> x, std::optional<AlgebraRep> y,
                                   std::optional<AlgebraRep> z, double coeff = 1.0);

  MultiscaleField& add(SeparableTerm term);
  MultiscaleField& add(TabulatedTerm term);

  int dim() const noexcept { return dim_; }
  const std::vector<SeparableTerm>& separable_terms() const noexcept { return separable_; }
  const std::vector<TabulatedTerm>& tabulated_terms() const noexcept { return tabulated_; }

  double operator()(Point x, std::span<const double> y, std::span<const double> z) const;

 private:
  int dim_;
  std::vector<SeparableTerm> separable_;
  std::vector<TabulatedTerm> tabulated_;
};

/// Nodal samples of x -> f(x, x / eps1, x / eps2). Requires eps2 < eps1 <= 1
/// and the mesh inside every declared x-domain.
Field trace_sample(const MultiscaleField& f, double eps1, double eps2, const Mesh& mesh);

}  // namespace reiterhom::fields

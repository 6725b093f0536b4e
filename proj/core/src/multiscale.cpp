#include "reiterhom/multiscale.hpp"

#include <cmath>

#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::fields {

namespace {

// Multilinear weights of a periodic grid: up to four (index, weight) pairs.
struct Stencil {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
};

Stencil periodic_stencil(const CellGridShape& g, std::span<const double> p) {
  std::array<int, 2> i0{0, 0}, i1{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    double s = p[a] / g.length * g.n;
    s -= g.n * std::floor(s / g.n);
    const int i = static_cast<int>(std::floor(s));
    t[a] = s - i;
    i0[a] = i % g.n;
    i1[a] = (i + 1) % g.n;
  }
  Stencil st;
  if (g.dim == 1) {
    st.index = {static_cast<std::size_t>(i0[0]), static_cast<std::size_t>(i1[0]), 0, 0};
    st.weight = {1.0 - t[0], t[0], 0.0, 0.0};
    st.count = 2;
    return st;
  }
  const auto n = static_cast<std::size_t>(g.n);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) + n * static_cast<std::size_t>(j); };
  st.index = {idx(i0[0], i0[1]), idx(i1[0], i0[1]), idx(i0[0], i1[1]), idx(i1[0], i1[1])};
  st.weight = {(1 - t[0]) * (1 - t[1]), t[0] * (1 - t[1]), (1 - t[0]) * t[1], t[0] * t[1]};
  st.count = 4;
  return st;
}

Stencil bounded_stencil(const Mesh& m, Point p) {
  std::array<int, 2> i0{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  const int n = m.cells_per_axis();
  for (int a = 0; a < m.dim(); ++a) {
    double s = std::clamp((p[a] - m.lower()[a]) / m.spacing(a), 0.0, static_cast<double>(n));
    const int i = std::min(static_cast<int>(std::floor(s)), n - 1);
    t[a] = s - i;
    i0[a] = i;
  }
  Stencil st;
  if (m.dim() == 1) {
    st.index = {m.node_index(i0[0]), m.node_index(i0[0] + 1), 0, 0};
    st.weight = {1.0 - t[0], t[0], 0.0, 0.0};
    st.count = 2;
    return st;
  }
  st.index = {m.node_index(i0[0], i0[1]), m.node_index(i0[0] + 1, i0[1]), m.node_index(i0[0], i0[1] + 1),
              m.node_index(i0[0] + 1, i0[1] + 1)};
  st.weight = {(1 - t[0]) * (1 - t[1]), t[0] * (1 - t[1]), (1 - t[0]) * t[1], t[0] * t[1]};
  st.count = 4;
  return st;
}

}  // namespace

std::array<double, 2> CellGridShape::node(std::size_t k) const noexcept {
  const double h = length / n;
  const auto nn = static_cast<std::size_t>(n);
  if (dim == 1) return {h * static_cast<double>(k), 0.0};
  return {h * static_cast<double>(k % nn), h * static_cast<double>(k / nn)};
}

double TabulatedTerm::operator()(Point xp, std::span<const double> yv, std::span<const double> zv) const {
  const Stencil sx = bounded_stencil(x_mesh, xp);
  const Stencil sy = periodic_stencil(y, yv);
  const Stencil sz = periodic_stencil(z, zv);
  double s = 0.0;
  for (int a = 0; a < sx.count; ++a) {
    for (int b = 0; b < sy.count; ++b) {
      for (int c = 0; c < sz.count; ++c) {
        s += sx.weight[a] * sy.weight[b] * sz.weight[c] * at(sx.index[a], sy.index[b], sz.index[c]);
      }
    }
  }
  return s;
}

MultiscaleField::MultiscaleField(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2) throw Error(Errc::domain, "multiscale fields live in dimension 1 or 2");
}

MultiscaleField MultiscaleField::constant(int dim, double c) {
  MultiscaleField f(dim);
  f.add(SeparableTerm{c, std::nullopt, std::nullopt, std::nullopt});
  return f;
}

MultiscaleField MultiscaleField::separable(int dim, std::optional<XFactor> x, std::optional<AlgebraRep> y,
                                           std::optional<AlgebraRep> z, double coeff) {
  MultiscaleField f(dim);
  f.add(SeparableTerm{coeff, std::move(x), std::move(y), std::move(z)});
  return f;
}

MultiscaleField& MultiscaleField::add(SeparableTerm term) {
  for (const auto* rep : {&term.y, &term.z}) {
    if (rep->has_value() && (*rep)->dim() != dim_) {
      throw Error(Errc::shape, "cell factor dimension differs from the field dimension");
    }
  }
  separable_.push_back(std::move(term));
  return *this;
}

MultiscaleField& MultiscaleField::add(TabulatedTerm term) {
  if (term.x_mesh.dim() != dim_ || term.y.dim != dim_ || term.z.dim != dim_) {
    throw Error(Errc::shape, "tabulated term dimension differs from the field dimension");
  }
  if (term.values.size() != term.x_mesh.node_count() * term.y.size() * term.z.size()) {
    throw Error(Errc::shape, "tabulated term value count does not match its grids");
  }
  tabulated_.push_back(std::move(term));
  return *this;
}

double MultiscaleField::operator()(Point x, std::span<const double> y, std::span<const double> z) const {
  double total = 0.0;
  for (const SeparableTerm& t : separable_) {
    double v = t.coeff;
    if (t.x) v *= t.x->fn(x);
    if (t.y) v *= (*t.y)(y);
    if (t.z) v *= (*t.z)(z);
    total += v;
  }
  for (const TabulatedTerm& t : tabulated_) total += t(x, y, z);
  return total;
}

Field trace_sample(const MultiscaleField& f, double eps1, double eps2, const Mesh& mesh) {
  if (!(eps1 > 0.0 && eps2 > 0.0 && eps2 < eps1 && eps1 <= 1.0)) {
    throw Error(Errc::domain, fmt::format("trace_sample needs 0 < eps2 < eps1 <= 1, got {}, {}", eps1, eps2));
  }
  if (mesh.dim() != f.dim()) throw Error(Errc::shape, "mesh and multiscale field dimensions differ");
  for (const SeparableTerm& t : f.separable_terms()) {
    if (!t.x || !t.x->domain) continue;
    const auto& box = *t.x->domain;
    for (int a = 0; a < mesh.dim(); ++a) {
      const double slack = 1e-12 * std::max(1.0, box[1][a] - box[0][a]);
      if (mesh.lower()[a] < box[0][a] - slack || mesh.upper()[a] > box[1][a] + slack) {
        throw Error(Errc::domain, "mesh extends outside the x-domain of the multiscale field");
      }
    }
  }
  for (const TabulatedTerm& t : f.tabulated_terms()) {
    if (!t.x_mesh.contains(mesh.lower()) || !t.x_mesh.contains(mesh.upper())) {
      throw Error(Errc::domain, "mesh extends outside the x-mesh of a tabulated term");
    }
  }
  std::vector<double> values(mesh.node_count());
  const int d = mesh.dim();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Point x = mesh.node(i);
    std::array<double, 2> y{x[0] / eps1, x[1] / eps1};
    std::array<double, 2> z{x[0] / eps2, x[1] / eps2};
    values[i] = f(x, std::span<const double>(y.data(), d), std::span<const double>(z.data(), d));
  }
  return Field(mesh, FieldKind::scalar, std::move(values));
}

}  // namespace reiterhom::fields

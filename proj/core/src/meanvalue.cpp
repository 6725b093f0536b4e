#include "reiterhom/meanvalue.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::meanvalue {

namespace {

using fields::Mesh;
using fields::MultiscaleField;
using fields::Point;
using fields::SeparableTerm;
using fields::TabulatedTerm;

constexpr int kRule1d = 4096;
constexpr int kRule2d = 256;

double periodic_rule(const CellCallable& fn, int dim, double period) {
  const int n = dim == 1 ? kRule1d : kRule2d;
  const double h = period / n;
  double s = 0.0;
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      const double y = i * h;
      s += fn(std::span<const double>(&y, 1));
    }
    return s / n;
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::array<double, 2> y{i * h, j * h};
      s += fn(y);
    }
  }
  return s / (static_cast<double>(n) * n);
}

double adaptive(const std::function<double(double)>& fn, double a, double b) {
  // Split into unit-length pieces so oscillatory integrands stay resolved.
  const int pieces = std::max(1, static_cast<int>(std::ceil(b - a)));
  const double w = (b - a) / pieces;
  double s = 0.0;
  for (int k = 0; k < pieces; ++k) {
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a + k * w, a + (k + 1) * w, 12, 1e-11);
  }
  return s;
}

std::optional<AlgebraRep> product_opt(const std::optional<AlgebraRep>& a, const std::optional<AlgebraRep>& b) {
  if (a && b) return product(*a, *b);
  return a ? a : b;
}

double block_mean(const std::optional<AlgebraRep>& rep) { return rep ? mean(*rep) : 1.0; }

double x_factor(const SeparableTerm& t, Point x) { return t.x ? t.x->fn(x) : 1.0; }

// int over the box of g(x), Gauss-Legendre per unit-ish piece.
double integrate_box(const std::function<double(Point)>& g, const Mesh& domain) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  const Point lo = domain.lower();
  const Point hi = domain.upper();
  const int pieces = 64;
  if (domain.dim() == 1) {
    const double w = (hi[0] - lo[0]) / pieces;
    double s = 0.0;
    for (int k = 0; k < pieces; ++k) {
      s += Rule::integrate([&](double x) { return g({x, 0.0}); }, lo[0] + k * w, lo[0] + (k + 1) * w);
    }
    return s;
  }
  const int p2 = 16;
  const double wx = (hi[0] - lo[0]) / p2;
  const double wy = (hi[1] - lo[1]) / p2;
  double s = 0.0;
  for (int kx = 0; kx < p2; ++kx) {
    for (int ky = 0; ky < p2; ++ky) {
      s += Rule::integrate(
          [&](double x) {
            return Rule::integrate([&](double y) { return g({x, y}); }, lo[1] + ky * wy, lo[1] + (ky + 1) * wy);
          },
          lo[0] + kx * wx, lo[0] + (kx + 1) * wx);
    }
  }
  return s;
}

// int_Omega g(x) M_y M_z(T(x, .) w v) dx, with the cell means taken by the
// nodal rule of the table's cell grids.
double tabulated_pairing(const TabulatedTerm& t, const SeparableTerm& s, const Mesh& domain) {
  const int d = t.x_mesh.dim();
  const std::size_t ny = t.y.size();
  const std::size_t nz = t.z.size();
  std::vector<double> wy(ny, 1.0), vz(nz, 1.0);
  for (std::size_t j = 0; j < ny; ++j) {
    const auto p = t.y.node(j);
    if (s.y) wy[j] = (*s.y)(std::span<const double>(p.data(), d));
  }
  for (std::size_t k = 0; k < nz; ++k) {
    const auto p = t.z.node(k);
    if (s.z) vz[k] = (*s.z)(std::span<const double>(p.data(), d));
  }
  std::vector<double> slice(t.x_mesh.node_count());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      double row = 0.0;
      for (std::size_t k = 0; k < nz; ++k) row += t.at(i, j, k) * vz[k];
      acc += wy[j] * row;
    }
    slice[i] = acc / static_cast<double>(ny * nz);
  }
  const fields::Field m(t.x_mesh, fields::FieldKind::scalar, std::move(slice));
  return s.coeff * integrate_box([&](Point x) { return x_factor(s, x) * m.interpolate(x); }, domain);
}

double tabulated_self_pairing(const TabulatedTerm& a, const TabulatedTerm& b, const Mesh& domain) {
  if (!(a.x_mesh == b.x_mesh) || a.y.n != b.y.n || a.z.n != b.z.n || a.y.length != b.y.length ||
      a.z.length != b.z.length) {
    throw Error(Errc::shape, "pairing of tabulated terms needs identical grids");
  }
  const std::size_t cells = a.y.size() * a.z.size();
  std::vector<double> slice(a.x_mesh.node_count());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    double acc = 0.0;
    for (std::size_t jk = 0; jk < cells; ++jk) acc += a.values[i * cells + jk] * b.values[i * cells + jk];
    slice[i] = acc / static_cast<double>(cells);
  }
  const fields::Field m(a.x_mesh, fields::FieldKind::scalar, std::move(slice));
  return integrate_box([&](Point x) { return m.interpolate(x); }, domain);
}

}  // namespace

double mean(const AlgebraRep& u) {
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, TrigPoly>) {
          return b.zero_mode();
        } else if constexpr (std::is_same_v<T, CellGrid>) {
          double s = 0.0;
          for (double v : b.values) s += v;
          return s / static_cast<double>(b.values.size());
        } else {
          return periodic_rule(b, u.dim(), u.period());
        }
      },
      u.base());
}

double reiterated_mean(std::span<const TensorTerm> terms) {
  double s = 0.0;
  for (const TensorTerm& t : terms) s += t.coeff * mean(t.y) * mean(t.z);
  return s;
}

double ergodic_average(const AlgebraRep& u, double r, std::span<const double> center) {
  if (!(r > 0.0)) throw Error(Errc::domain, "ergodic_average needs r > 0");
  if (u.dim() == 1) {
    const double c = center.empty() ? 0.0 : center[0];
    const double s = adaptive(
        [&](double x) {
          const double y = c + x;
          return u(std::span<const double>(&y, 1));
        },
        -r, r);
    return s / (2.0 * r);
  }
  const double c0 = center.size() > 0 ? center[0] : 0.0;
  const double c1 = center.size() > 1 ? center[1] : 0.0;
  // x = r sin(theta) keeps the outer integrand smooth at the poles.
  const auto outer = [&](double theta) {
    const double x = r * std::sin(theta);
    const double half = r * std::cos(theta);
    const double inner = adaptive(
        [&](double y) {
          const std::array<double, 2> p{c0 + x, c1 + y};
          return u(p);
        },
        -half, half);
    return r * std::cos(theta) * inner;
  };
  const double s = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      outer, -std::numbers::pi / 2, std::numbers::pi / 2, 10, 1e-9);
  return s / (std::numbers::pi * r * r);
}

double ergodic_deviation(const AlgebraRep& u, double r, std::span<const std::array<double, 2>> centers) {
  const double m = mean(u);
  double worst = 0.0;
  for (const auto& c : centers) {
    worst = std::max(worst, std::abs(ergodic_average(u, r, std::span<const double>(c.data(), u.dim())) - m));
  }
  return worst;
}

double limit_pairing(const MultiscaleField& u0, const MultiscaleField& f, const Mesh& domain) {
  if (u0.dim() != f.dim() || domain.dim() != f.dim()) {
    throw Error(Errc::shape, "limit_pairing operands live in different dimensions");
  }
  double total = 0.0;
  for (const SeparableTerm& a : u0.separable_terms()) {
    for (const SeparableTerm& b : f.separable_terms()) {
      const double my = block_mean(product_opt(a.y, b.y));
      const double mz = block_mean(product_opt(a.z, b.z));
      if (my == 0.0 || mz == 0.0) continue;
      double xi;
      if (!a.x && !b.x) {
        xi = domain.volume();
      } else {
        xi = integrate_box([&](Point x) { return x_factor(a, x) * x_factor(b, x); }, domain);
      }
      total += a.coeff * b.coeff * xi * my * mz;
    }
  }
  for (const TabulatedTerm& t : u0.tabulated_terms()) {
    for (const SeparableTerm& b : f.separable_terms()) total += tabulated_pairing(t, b, domain);
    for (const TabulatedTerm& s : f.tabulated_terms()) total += tabulated_self_pairing(t, s, domain);
  }
  for (const TabulatedTerm& t : f.tabulated_terms()) {
    for (const SeparableTerm& a : u0.separable_terms()) total += tabulated_pairing(t, a, domain);
  }
  return total;
}

bool SigmaTestReport::gap_decreasing(double floor) const {
  if (gap.empty()) return false;
  if (gap.back() <= floor && gap.front() <= floor) return true;
  return gap.back() < gap.front();
}

SigmaTestReport sigma_test(const MultiscaleField& u0, const MultiscaleField& f, const Mesh& mesh,
                           std::span<const double> eps_list) {
  if (eps_list.empty()) throw Error(Errc::config, "sigma_test needs a nonempty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw Error(Errc::config, "eps list must be strictly decreasing");
  }
  const double smallest = eps_list.back();
  for (int a = 0; a < mesh.dim(); ++a) {
    const double per_unit = mesh.cells_per_axis() / mesh.length(a);
    if (per_unit < 4.0 / (smallest * smallest)) {
      throw Error(Errc::resolution, fmt::format("mesh has {} cells per unit length, eps = {} needs {}", per_unit,
                                                smallest, 4.0 / (smallest * smallest)));
    }
  }
  SigmaTestReport rep;
  rep.rhs = limit_pairing(u0, f, mesh);
  for (double eps : eps_list) {
    const fields::Field ue = fields::trace_sample(u0, eps, eps * eps, mesh);
    const fields::Field fe = fields::trace_sample(f, eps, eps * eps, mesh);
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) s += mesh.weight(i) * ue[i] * fe[i];
    rep.eps.push_back(eps);
    rep.lhs.push_back(s);
    rep.gap.push_back(std::abs(s - rep.rhs));
  }
  return rep;
}

}  // namespace reiterhom::meanvalue

#include "reiterhom/norms.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "reiterhom/error.hpp"

namespace reiterhom::fields {

namespace {

// int Phi(|u| / delta); values Phi cannot represent count as infinite.
double modular(const Field& u, const nfunc::NFunction& nf, double delta) {
  const Mesh& m = u.mesh();
  double s = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const double a = u.magnitude(i);
    if (a == 0.0) continue;
    double v = 0.0;
    try {
      v = nf(a / delta);
    } catch (const Error& e) {
      if (e.code() != Errc::range) throw;
      return std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    s += m.weight(i) * v;
  }
  return s;
}

}  // namespace

double luxemburg_norm(const Field& u, const nfunc::NFunction& nf) {
  const Mesh& m = u.mesh();
  if (m.node_count() == 0 || !(m.volume() > 0.0)) throw Error(Errc::domain, "luxemburg_norm on an empty mesh");
  const double top = u.max_magnitude();
  if (top == 0.0) return 0.0;

  // modular is nonincreasing in delta; bracket geometrically, step off the
  // region where Phi overflows, then polish with TOMS 748.
  const auto f = [&](double delta) { return modular(u, nf, delta) - 1.0; };
  double hi = 2.0 * top * std::max(1.0, m.volume());
  while (f(hi) > 0.0) hi *= 2.0;
  double lo = hi;
  double f_lo = 0.0;
  do {
    hi = lo;
    lo *= 0.5;
    f_lo = f(lo);
  } while (f_lo <= 0.0 && lo > 1e-300);
  if (f_lo <= 0.0) return hi;
  while (!std::isfinite(f_lo)) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
    if (hi - lo <= 1e-15 * hi) return hi;
  }
  const double f_hi = f(hi);
  if (f_hi == 0.0) return hi;
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(50), iterations);
  return root.second;
}

HolderPairing holder_pairing(const Field& u, const Field& v, const nfunc::NFunction& nf) {
  if (!(u.mesh() == v.mesh()) || u.kind() != FieldKind::scalar || v.kind() != FieldKind::scalar) {
    throw Error(Errc::shape, "holder_pairing needs two scalar fields on one mesh");
  }
  const Mesh& m = u.mesh();
  double s = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) s += m.weight(i) * u[i] * v[i];
  return {std::abs(s), 2.0 * luxemburg_norm(u, nf) * luxemburg_norm(v, nfunc::complementary(nf))};
}

Field gradient(const Field& u) {
  if (u.kind() != FieldKind::scalar) throw Error(Errc::kind, "gradient expects a scalar field");
  const Mesh& m = u.mesh();
  const int d = m.dim();
  const int np = m.nodes_per_axis();
  std::vector<double> out(m.node_count() * d);
  for (std::size_t idx = 0; idx < m.node_count(); ++idx) {
    const auto ij = m.node_coords(idx);
    for (int a = 0; a < d; ++a) {
      const double h = m.spacing(a);
      auto at = [&](int shift) {
        std::array<int, 2> c = ij;
        c[a] += shift;
        if (m.periodic()) c[a] = m.wrap(c[a]);
        return u[m.node_index(c[0], c[1])];
      };
      double g;
      if (m.periodic() || (ij[a] > 0 && ij[a] < np - 1)) {
        g = (at(1) - at(-1)) / (2.0 * h);
      } else if (ij[a] == 0) {
        g = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
      } else {
        g = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
      }
      out[idx * d + a] = g;
    }
  }
  return Field(m, FieldKind::vector, std::move(out));
}

}  // namespace reiterhom::fields

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/field.hpp"
#include "reiterhom/norms.hpp"

using namespace reiterhom;
using fields::Field;
using fields::Mesh;
using nfunc::NFunction;

TEST(Mesh, CountsAndWeights) {
  const Mesh m = Mesh::interval(0.0, 2.0, 8);
  EXPECT_EQ(m.node_count(), 9u);
  double w = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) w += m.weight(i);
  EXPECT_NEAR(w, 2.0, 1e-14);
  const Mesh p = Mesh::unit_cell(2, 6);
  EXPECT_EQ(p.node_count(), 36u);
  EXPECT_EQ(p.wrap(-1), 5);
  EXPECT_EQ(p.node_index(2, 3), 2u + 6u * 3u);
  EXPECT_THROW(Mesh::interval(1.0, 0.0, 4), Error);
  EXPECT_THROW(Mesh::box({0.0, 0.0}, {1.0, 1.0}, Mesh::kMaxCells2d + 1), Error);
}

TEST(Field, CsvRoundTrip) {
  const Mesh m = Mesh::box({0.0, -1.0}, {1.0, 1.0}, 5);
  const Field u = Field::sample(m, [](fields::Point p) { return std::sin(p[0]) * std::exp(p[1]); });
  std::stringstream ss;
  fields::write_csv(ss, u);
  const Field back = fields::read_csv(ss);
  ASSERT_EQ(back.mesh(), m);
  for (std::size_t i = 0; i < m.node_count(); ++i) EXPECT_EQ(back[i], u[i]);
}

TEST(Field, InterpolationIsExactForBilinear) {
  const Mesh m = Mesh::box({0.0, 0.0}, {2.0, 1.0}, 4);
  const auto f = [](fields::Point p) { return 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]; };
  const Field u = Field::sample(m, f);
  for (fields::Point p : {fields::Point{0.3, 0.7}, fields::Point{1.9, 0.05}, fields::Point{1.0, 0.5}}) {
    EXPECT_NEAR(u.interpolate(p), f(p), 1e-13);
  }
}

TEST(Field, GradientExactForQuadraticInterior) {
  const Mesh m = Mesh::interval(0.0, 1.0, 20);
  const Field u = Field::sample(m, [](fields::Point p) { return p[0] * p[0]; });
  const Field g = fields::gradient(u);
  for (std::size_t i = 0; i < m.node_count(); ++i) EXPECT_NEAR(g[i], 2.0 * m.node(i)[0], 1e-12);
}

TEST(Field, CombineNeedsCommonMesh) {
  const Field a = Field::zeros(Mesh::interval(0.0, 1.0, 4));
  const Field b = Field::zeros(Mesh::interval(0.0, 1.0, 5));
  EXPECT_THROW(fields::combine(1.0, a, 1.0, b), Error);
}

TEST(Luxemburg, ClosedForms) {
  const NFunction sq = NFunction::power(2.0, 1.0);  // t^2
  const Mesh m = Mesh::interval(0.0, 1.0, 4096);
  EXPECT_NEAR(fields::luxemburg_norm(Field::sample(m, [](fields::Point) { return 3.0; }), sq), 3.0, 1e-6);
  EXPECT_NEAR(fields::luxemburg_norm(Field::sample(m, [](fields::Point p) { return p[0]; }), sq), 1.0 / std::sqrt(3.0),
              1e-6);
  EXPECT_EQ(fields::luxemburg_norm(Field::zeros(m), sq), 0.0);
}

TEST(Luxemburg, AgreesWithRootFindingOracle) {
  // int_0^1 Phi(|u| / d) dx = 1 solved by quadrature plus bracketing.
  const NFunction nf = NFunction::power_log(1.0);
  const auto u = [](double x) { return 2.0 + std::sin(5.0 * x); };
  const auto modular = [&](double d) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate([&](double x) { return nf(u(x) / d); }, 0.0,
                                                                         1.0, 10, 1e-13) -
           1.0;
  };
  boost::math::tools::eps_tolerance<double> tol(40);
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::bisect(modular, 0.5, 10.0, tol, iters);
  const double expect = 0.5 * (lo + hi);
  const Mesh m = Mesh::interval(0.0, 1.0, 8192);
  const double got = fields::luxemburg_norm(Field::sample(m, [&](fields::Point p) { return u(p[0]); }), nf);
  EXPECT_NEAR(got, expect, 1e-6 * expect);
}

TEST(Luxemburg, NormProperties) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Mesh m = Mesh::box({0.0, 0.0}, {1.0, 1.0}, 16);
  const NFunction nf = NFunction::power(3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(m.node_count()), b(m.node_count());
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    const Field u(m, fields::FieldKind::scalar, a), v(m, fields::FieldKind::scalar, b);
    const double nu = fields::luxemburg_norm(u, nf), nv = fields::luxemburg_norm(v, nf);
    EXPECT_NEAR(fields::luxemburg_norm(fields::combine(-2.5, u, 0.0, v), nf), 2.5 * nu, 1e-9 * nu);
    EXPECT_LE(fields::luxemburg_norm(fields::combine(1.0, u, 1.0, v), nf), (nu + nv) * (1.0 + 1e-9));
  }
}

TEST(Luxemburg, GeneralizedHolderOnRandomTrials) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(0.1, 5.0), freq(0.5, 20.0);
  const Mesh m = Mesh::interval(0.0, 1.0, 512);
  for (const NFunction& nf : {NFunction::power(2.0), NFunction::power(3.0), NFunction::power_log(1.0)}) {
    for (int trial = 0; trial < 100; ++trial) {
      const double a = amp(rng), b = amp(rng), k = freq(rng), l = freq(rng);
      const Field u = Field::sample(m, [&](fields::Point p) { return a * std::sin(k * p[0]) + 0.3; });
      const Field v = Field::sample(m, [&](fields::Point p) { return b * std::cos(l * p[0]); });
      const fields::HolderPairing h = fields::holder_pairing(u, v, nf);
      EXPECT_LE(h.lhs, h.bound * (1.0 + 1e-12)) << nf.describe();
    }
  }
}

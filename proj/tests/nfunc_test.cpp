#include <cmath>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/nfunc.hpp"

using namespace reiterhom;
using nfunc::NFunction;

namespace {

// Fenchel conjugate by direct maximization of s t - Phi(s) over s.
double conjugate_by_search(const NFunction& nf, double t) {
  double hi = 1.0;
  while (nf.density(hi) < t) hi *= 2.0;
  const auto neg = [&](double s) { return nf(s) - s * t; };
  const auto [s, v] = boost::math::tools::brent_find_minima(neg, 0.0, hi, 52);
  (void)s;
  return -v;
}

std::vector<NFunction> suite() {
  return {NFunction::power(2.0), NFunction::power(3.0), NFunction::power_log(1.0), NFunction::power(1.5),
          NFunction::power(4.0, 0.7)};
}

}  // namespace

TEST(NFunction, PowerClosedForm) {
  const NFunction p3 = NFunction::power(3.0);
  EXPECT_DOUBLE_EQ(p3(2.0), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(p3.density(2.0), 4.0);
  EXPECT_NEAR(p3.inverse(p3(1.7)), 1.7, 1e-12);
  EXPECT_DOUBLE_EQ(NFunction::power(2.0, 1.0)(3.0), 9.0);
}

TEST(NFunction, PowerLogMatchesDefinition) {
  const NFunction f = NFunction::power_log(1.0);
  for (double t : {0.0, 0.01, 0.5, 1.0, 7.0, 120.0}) {
    EXPECT_NEAR(f(t), t * std::log1p(t), 1e-12 * (1.0 + t * std::log1p(t)));
    EXPECT_NEAR(f.density(t), std::log1p(t) + t / (1.0 + t), 1e-12 * (1.0 + t));
  }
}

TEST(NFunction, ComplementaryOfPowerIsConjugateExponent) {
  for (double p : {1.25, 1.5, 2.0, 3.0, 5.0}) {
    const double q = p / (p - 1.0);
    const NFunction conj = nfunc::complementary(NFunction::power(p));
    for (double t : nfunc::dyadic_grid(1e-2, 1e2, 50)) {
      EXPECT_NEAR(conj(t), std::pow(t, q) / q, 1e-8 * (1.0 + std::pow(t, q) / q)) << "p=" << p << " t=" << t;
    }
  }
}

TEST(NFunction, ComplementaryAgreesWithDirectMaximization) {
  for (const NFunction& nf : suite()) {
    const NFunction conj = nfunc::complementary(nf);
    for (double t : {0.05, 0.3, 1.0, 2.5, 9.0}) {
      const double expect = conjugate_by_search(nf, t);
      EXPECT_NEAR(conj(t), expect, 1e-7 * (1.0 + expect)) << nf.describe() << " t=" << t;
    }
  }
}

TEST(NFunction, ConjugateOfConjugateIsOriginal) {
  for (const NFunction& nf : suite()) {
    const NFunction back = nfunc::complementary(nfunc::complementary(nf));
    for (double t : {0.1, 1.0, 10.0}) EXPECT_NEAR(back(t), nf(t), 1e-9 * (1.0 + nf(t)));
  }
}

TEST(NFunction, ComplementaryInverseMatchesBuiltConjugate) {
  const NFunction nf = NFunction::power_log(1.0);
  const NFunction conj = nfunc::complementary(nf);
  for (double v : {0.01, 0.5, 3.0, 40.0}) EXPECT_NEAR(conj(nfunc::complementary_inverse(nf, v)), v, 1e-7 * (1.0 + v));
}

TEST(NFunction, YoungInequalityProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (const NFunction& nf : suite()) {
    const NFunction conj = nfunc::complementary(nf);
    for (int k = 0; k < 200; ++k) {
      const double s = std::pow(10.0, u(rng)), t = std::pow(10.0, u(rng) / 2.0);
      EXPECT_LE(s * t, (nf(s) + conj(t)) * (1.0 + 1e-9)) << nf.describe();
    }
  }
}

TEST(NFunction, ConvexIncreasingProperty) {
  const auto grid = nfunc::dyadic_grid(1e-3, 1e3, 200);
  for (const NFunction& nf : suite()) {
    EXPECT_TRUE(nfunc::check_invariants(nf, grid).empty()) << nf.describe();
    for (std::size_t i = 1; i < grid.size(); ++i) {
      EXPECT_GE(nf(grid[i]), nf(grid[i - 1]));
      EXPECT_GE(nf.density(grid[i]), nf.density(grid[i - 1]));
    }
  }
}

TEST(NFunction, ScalarPropertiesOnDyadicGrid) {
  const auto grid = nfunc::dyadic_grid(1e-3, 1e3, 200);
  ASSERT_EQ(grid.size(), 200u);
  for (const NFunction& nf : {NFunction::power(2.0), NFunction::power(3.0), NFunction::power_log(1.0)}) {
    const nfunc::PropertyCheck pc = nfunc::check_properties(nf, grid);
    EXPECT_TRUE(pc.holds) << nf.describe();
    EXPECT_GE(pc.min_index, 1.0 - 1e-10);
  }
}

TEST(NFunction, GrowthClasses) {
  const auto grid = nfunc::default_grid();
  const auto quad = nfunc::growth_report(NFunction::power(2.0), grid);
  EXPECT_TRUE(quad.delta2);
  EXPECT_TRUE(quad.delta_prime);
  EXPECT_NEAR(quad.simonenko_lo, 2.0, 1e-9);
  EXPECT_NEAR(quad.simonenko_hi, 2.0, 1e-9);
  const auto expo = nfunc::growth_report(NFunction::exp_minus_one(), grid);
  EXPECT_FALSE(expo.delta2);
  const auto plog = nfunc::growth_report(NFunction::power_log(1.0), grid);
  EXPECT_TRUE(plog.delta2);
  EXPECT_GT(plog.simonenko_lo, 1.0);
}

TEST(NFunction, TabulatedReproducesSampledPower) {
  std::vector<double> t, phi;
  for (int i = 0; i <= 400; ++i) {
    t.push_back(0.025 * i);
    phi.push_back(t.back() * t.back());
  }
  const NFunction tab = NFunction::tabulated(t, phi);
  const NFunction exact = NFunction::power(3.0);
  for (double s : {0.1, 1.0, 3.3, 9.9}) EXPECT_NEAR(tab(s), exact(s), 1e-4 * (1.0 + exact(s)));
  EXPECT_THROW(nfunc::evaluate(tab, 11.0), Error);
}

TEST(NFunction, RejectsBadInput) {
  EXPECT_THROW(nfunc::evaluate(NFunction::power(2.0), -1.0), Error);
  EXPECT_THROW(NFunction::power(1.0), Error);
  EXPECT_THROW(NFunction::tabulated({0.0, 1.0}, {0.0, 1.0}), Error);
  EXPECT_THROW(NFunction::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 2.0, 1.0, 3.0}), Error);
  EXPECT_THROW(nfunc::coercivity_constant(NFunction::power(2.0), 1.5), Error);
}

TEST(NFunction, CoercivityConstantOfQuadratic) {
  // Phi~ = Phi for t^2/2, so theta = h.
  EXPECT_NEAR(nfunc::coercivity_constant(NFunction::power(2.0), 0.5), 0.5, 1e-10);
}

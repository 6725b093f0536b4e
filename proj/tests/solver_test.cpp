#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/norms.hpp"
#include "reiterhom/solver.hpp"

using namespace reiterhom;
using cell::FluxTable;
using cell::Vec;
using fields::Mesh;
using fields::Point;

namespace {

FluxTable linear_table(double slope, double xi_max) {
  return FluxTable::from_function(1, {0.0}, {cell::linspace(-xi_max, xi_max, 9), {0.0}},
                                  [slope](double, Vec xi) { return Vec{slope * xi[0], 0.0}; });
}

solver::EllipticProblem effective(const FluxTable& t, int n) {
  solver::EllipticProblem p;
  p.mesh = Mesh::interval(0.0, 1.0, n);
  p.mode = solver::FluxMode::effective;
  p.table = &t;
  p.f = [](Point) { return 1.0; };
  return p;
}

}  // namespace

TEST(MacroSolve, ReproducesQuadraticProfile) {
  const FluxTable t = linear_table(3.0, 1.0);
  const auto rep = solver::solve(effective(t, 1024), 1e-10);
  const Mesh& m = rep.solution.mesh();
  double err = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const double x = m.node(i)[0];
    err = std::max(err, std::abs(rep.solution[i] - x * (1.0 - x) / 6.0));
  }
  EXPECT_LE(err, 1e-4);
  EXPECT_FALSE(rep.clamped);
  EXPECT_LE(rep.residual, 1e-10);
  // Energy int q . Du - f u vanishes at the discrete solution of a linear problem.
  EXPECT_NEAR(rep.energy, 0.0, 1e-10);
  const auto range = solver::solution_range(rep.solution);
  EXPECT_NEAR(range.u_max, 1.0 / 24.0, 1e-6);
  EXPECT_NEAR(range.gradient_max, 1.0 / 6.0, 1e-3);
}

TEST(MacroSolve, NarrowTableRaisesClampFlag) {
  // u reaches 1/24, past the last r node; q does not depend on r, so the
  // clamped problem is still solvable.
  const FluxTable t = FluxTable::from_function(1, {0.0, 0.01}, {cell::linspace(-1.0, 1.0, 9), {0.0}},
                                               [](double, Vec xi) { return Vec{3.0 * xi[0], 0.0}; });
  const auto rep = solver::solve(effective(t, 64), 1e-10);
  EXPECT_TRUE(rep.clamped);
  EXPECT_LE(rep.residual, 1e-10);
}

TEST(MacroSolve, RejectsPeriodicMeshAndBadRhs) {
  const FluxTable t = linear_table(3.0, 1.0);
  auto p = effective(t, 16);
  p.mesh = Mesh::unit_cell(1, 16);
  EXPECT_THROW(solver::solve(p, 1e-10), Error);
  p = effective(t, 16);
  p.f = [](Point x) { return 1.0 / (x[0] - 0.5); };
  try {
    solver::solve(p, 1e-10);
    FAIL() << "expected a domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::domain);
  }
}

TEST(DirectSolve, EnforcesResolutionRule) {
  const auto c = coeff::builtin_problem("lin1d");
  solver::EllipticProblem p;
  p.mode = solver::FluxMode::direct;
  p.coefficient = &c;
  p.eps = 0.125;
  p.f = [](Point) { return 1.0; };
  p.mesh = Mesh::interval(0.0, 1.0, 255);  // spacing > eps^2 / 4 = 1/256
  try {
    solver::solve(p, 1e-9);
    FAIL() << "expected a resolution error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::resolution);
  }
}

TEST(DirectSolve, Lin1dResolvedSolveIsBounded) {
  const auto c = coeff::builtin_problem("lin1d");
  solver::EllipticProblem p;
  p.mode = solver::FluxMode::direct;
  p.coefficient = &c;
  p.f = [](Point) { return 1.0; };
  std::vector<double> norms;
  for (double eps : {0.25, 0.125}) {
    p.eps = eps;
    p.mesh = Mesh::interval(0.0, 1.0, 4096);
    const auto rep = solver::solve(p, 1e-9);
    EXPECT_LE(rep.residual, 1e-9);
    EXPECT_TRUE(std::isfinite(rep.gradient_norm));
    EXPECT_TRUE(std::isfinite(rep.f_norm));
    norms.push_back(rep.gradient_norm);
  }
  // a . l >= |l|^2 and the Poincare inequality give |Du|_2 <= |f|_2 / pi,
  // and the Luxemburg norm for t^2/2 is the L^2 norm over sqrt 2.
  for (double n : norms) EXPECT_LE(n, 1.0 / (std::numbers::pi * std::sqrt(2.0)) + 1e-6);
}

TEST(Correctors, VanishForConstantCoefficient) {
  const auto c = coeff::builtin_problem("const1d");
  const FluxTable t = linear_table(2.0, 1.0);
  const auto macro = solver::solve(effective(t, 64), 1e-10);
  solver::CorrectorOptions opt;
  opt.recon_n = 4;
  const auto cs = solver::compute_correctors(macro.solution, c, Mesh::unit_cell(1, 8), Mesh::unit_cell(1, 8), opt);
  for (double v : cs.pi1.values) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : cs.pi2.values) EXPECT_NEAR(v, 0.0, 1e-12);
  const auto rec = solver::corrector_reconstruct(cs, 0.25, Mesh::interval(0.0, 1.0, 64));
  for (std::size_t i = 0; i < rec.field.mesh().node_count(); ++i) {
    EXPECT_NEAR(rec.field[i], cs.u0.interpolate(rec.field.mesh().node(i)), 1e-12);
  }
}

TEST(Correctors, Lin1dReconstructionBeatsNaiveGradient) {
  const auto c = coeff::builtin_problem("lin1d");
  const FluxTable t = linear_table(3.0, 1.0);
  const auto macro = solver::solve(effective(t, 256), 1e-10);
  solver::CorrectorOptions opt;
  opt.recon_n = 16;
  const auto cs = solver::compute_correctors(macro.solution, c, Mesh::unit_cell(1, 64), Mesh::unit_cell(1, 64), opt);
  EXPECT_EQ(cs.cell_solves, 17u * (1u + 64u));

  solver::EllipticProblem p;
  p.mode = solver::FluxMode::direct;
  p.coefficient = &c;
  p.eps = 0.125;
  p.f = [](Point) { return 1.0; };
  p.mesh = Mesh::interval(0.0, 1.0, 1024);
  const auto direct = solver::solve(p, 1e-10);
  const auto due = fields::gradient(direct.solution);
  const auto rec = solver::corrector_reconstruct(cs, p.eps, p.mesh);
  const auto du0 = fields::gradient(fields::resample(cs.u0, p.mesh));
  const double recon = fields::luxemburg_norm(fields::combine(1.0, due, -1.0, rec.gradient), c.phi);
  const double naive = fields::luxemburg_norm(fields::combine(1.0, due, -1.0, du0), c.phi);
  EXPECT_LT(recon, naive);
}

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/fem.hpp"

using namespace reiterhom;
using fem::Discretization;
using fem::LinearSolverKind;
using fields::Mesh;
using fields::Point;

namespace {

constexpr double kPi = std::numbers::pi;

fem::FluxCallback laplace(int dim) {
  return [dim](std::size_t, const Point&, double, std::span<const double> g) {
    fem::QpFlux q;
    for (int i = 0; i < dim; ++i) {
      q.a[i] = g[i];
      q.da_dg[i][i] = 1.0;
    }
    return q;
  };
}

// Variable isotropic coefficient k(x) = 2 + sin(2 pi x0) cos(2 pi x1).
fem::FluxCallback weighted(int dim) {
  return [dim](std::size_t, const Point& x, double, std::span<const double> g) {
    const double k = 2.0 + std::sin(2 * kPi * x[0]) * (dim == 2 ? std::cos(2 * kPi * x[1]) : 1.0);
    fem::QpFlux q;
    for (int i = 0; i < dim; ++i) {
      q.a[i] = k * g[i];
      q.da_dg[i][i] = k;
    }
    return q;
  };
}

double max_nodal_error(const std::vector<double>& u, const Mesh& m, const std::function<double(Point)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < m.node_count(); ++i) e = std::max(e, std::abs(u[i] - exact(m.node(i))));
  return e;
}

double solve_error_1d(int n) {
  const Discretization disc(Mesh::interval(0.0, 1.0, n));
  const auto load = disc.lumped_load([](Point p) { return kPi * kPi * std::sin(kPi * p[0]); });
  fem::NewtonOptions opt;
  opt.tol = 1e-12;
  const auto res = fem::solve_monotone(disc, laplace(1), load, std::vector<double>(disc.mesh().node_count(), 0.0), opt);
  return max_nodal_error(res.u, disc.mesh(), [](Point p) { return std::sin(kPi * p[0]); });
}

}  // namespace

TEST(Fem, DirichletLaplace1dIsSecondOrder) {
  const double e1 = solve_error_1d(32), e2 = solve_error_1d(64);
  EXPECT_LT(e2, 1e-3);
  EXPECT_NEAR(e1 / e2, 4.0, 0.3);
}

TEST(Fem, PeriodicLaplace2dAllSolversAgree) {
  const Discretization disc(Mesh::unit_cell(2, 32));
  const auto exact = [](Point p) { return std::sin(2 * kPi * p[0]) * std::sin(2 * kPi * p[1]); };
  const auto load = disc.lumped_load([&](Point p) { return 8 * kPi * kPi * exact(p); });
  std::vector<std::vector<double>> sols;
  for (auto kind : {LinearSolverKind::iterative, LinearSolverKind::spectral, LinearSolverKind::direct}) {
    fem::NewtonOptions opt;
    opt.tol = 1e-11;
    opt.linear = kind;
    sols.push_back(fem::solve_monotone(disc, laplace(2), load, std::vector<double>(disc.mesh().node_count(), 0.0), opt).u);
    EXPECT_LT(max_nodal_error(sols.back(), disc.mesh(), exact), 2e-2);
  }
  for (std::size_t i = 0; i < sols[0].size(); ++i) {
    EXPECT_NEAR(sols[0][i], sols[1][i], 1e-10);
    EXPECT_NEAR(sols[0][i], sols[2][i], 1e-10);
  }
}

TEST(Fem, SpectralPreconditionerMatchesDirectOnVariableCoefficients) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int dim : {1, 2}) {
    const Discretization disc(Mesh::unit_cell(dim, dim == 1 ? 128 : 24));
    const auto values = disc.evaluate(std::vector<double>(disc.mesh().node_count(), 0.0), weighted(dim));
    fem::SparseMatrix k;
    disc.jacobian(values, false, k);
    Eigen::VectorXd b(disc.dof_count());
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = g(rng);
    fem::LinearSolver spectral(disc, LinearSolverKind::spectral, true), direct(disc, LinearSolverKind::direct, true),
        jacobi(disc, LinearSolverKind::iterative, true);
    ASSERT_TRUE(spectral.compute(k));
    ASSERT_TRUE(direct.compute(k));
    ASSERT_TRUE(jacobi.compute(k));
    Eigen::VectorXd xs, xd, xj;
    ASSERT_TRUE(spectral.solve(b, xs));
    ASSERT_TRUE(direct.solve(b, xd));
    ASSERT_TRUE(jacobi.solve(b, xj));
    EXPECT_LT((xs - xd).norm(), 1e-8 * xd.norm());
    EXPECT_NEAR(xs.mean(), 0.0, 1e-12);
    // The FFT preconditioner needs far fewer iterations than Jacobi.
    EXPECT_LT(spectral.last_iterations(), jacobi.last_iterations());
  }
}

TEST(Fem, SpectralNeedsPeriodicMesh) {
  const Discretization disc(Mesh::interval(0.0, 1.0, 8));
  EXPECT_THROW(fem::LinearSolver(disc, LinearSolverKind::spectral, true), Error);
}

TEST(Fem, PLaplaceExactSolution) {
  // -(|u'| u')' = 1 on (0, 1) has u = (2/3) ((1/2)^{3/2} - |x - 1/2|^{3/2}).
  const Discretization disc(Mesh::interval(0.0, 1.0, 256));
  const fem::FluxCallback flux = [](std::size_t, const Point&, double, std::span<const double> g) {
    fem::QpFlux q;
    q.a[0] = std::abs(g[0]) * g[0];
    q.da_dg[0][0] = 2.0 * std::abs(g[0]);
    return q;
  };
  const auto load = disc.lumped_load([](Point) { return 1.0; });
  fem::NewtonOptions opt;
  opt.tol = 1e-10;
  const auto res = fem::solve_monotone(disc, flux, load, std::vector<double>(disc.mesh().node_count(), 0.0), opt);
  EXPECT_LE(res.residual, 1e-10);
  const auto exact = [](Point p) {
    return (2.0 / 3.0) * (std::pow(0.5, 1.5) - std::pow(std::abs(p[0] - 0.5), 1.5));
  };
  EXPECT_LT(max_nodal_error(res.u, disc.mesh(), exact), 1e-3);
}

TEST(Fem, NonMonotoneFluxIsRejected) {
  const Discretization disc(Mesh::interval(0.0, 1.0, 16));
  const fem::FluxCallback flux = [](std::size_t, const Point&, double, std::span<const double> g) {
    fem::QpFlux q;
    q.a[0] = -g[0];
    q.da_dg[0][0] = -1.0;
    return q;
  };
  const auto load = disc.lumped_load([](Point) { return 1.0; });
  try {
    fem::solve_monotone(disc, flux, load, std::vector<double>(disc.mesh().node_count(), 0.0), {});
    FAIL() << "expected a coercivity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::coercivity);
  }
}

TEST(Fem, ResidualVanishesAtDiscreteSolutionProperty) {
  // Residual is linear in the load for a linear flux: R(u; 2f) = R(u; f) - load.
  const Discretization disc(Mesh::box({0.0, 0.0}, {1.0, 2.0}, 8));
  const auto load = disc.lumped_load([](Point p) { return p[0] + p[1]; });
  fem::NewtonOptions opt;
  opt.tol = 1e-12;
  const auto res = fem::solve_monotone(disc, weighted(2), load, std::vector<double>(disc.mesh().node_count(), 0.0), opt);
  const auto values = disc.evaluate(res.u, weighted(2));
  EXPECT_LT(disc.residual(values, load).norm(), 1e-11);
  std::vector<double> doubled(load);
  for (double& v : doubled) v *= 2.0;
  const Eigen::VectorXd r2 = disc.residual(values, doubled);
  EXPECT_NEAR(r2.norm(), disc.to_dofs(load).norm(), 1e-10);
}

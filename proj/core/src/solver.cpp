#include "reiterhom/solver.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "reiterhom/error.hpp"
#include "reiterhom/norms.hpp"

namespace reiterhom::solver {

namespace {

constexpr int kNormCells = 64;

Mesh coarse_copy(const Mesh& m) {
  if (m.cells_per_axis() <= kNormCells) return m;
  if (m.dim() == 1) return Mesh::interval(m.lower()[0], m.upper()[0], kNormCells);
  return Mesh::box(m.lower(), m.upper(), kNormCells);
}

void check_problem(const EllipticProblem& p) {
  if (p.mesh.periodic()) throw Error(Errc::domain, "elliptic problems need a bounded mesh");
  if (!p.f) throw Error(Errc::config, "elliptic problem has no right-hand side");
  if (p.mode == FluxMode::direct) {
    if (p.coefficient == nullptr) throw Error(Errc::config, "direct mode needs a coefficient");
    if (p.coefficient->dim != p.mesh.dim()) throw Error(Errc::shape, "coefficient and mesh dimensions differ");
    if (!(p.eps > 0.0 && p.eps <= 1.0)) throw Error(Errc::domain, fmt::format("eps = {} is outside (0, 1]", p.eps));
    const double limit = p.eps * p.eps / 4.0;
    if (p.mesh.max_spacing() > limit * (1.0 + 1e-9)) {
      throw Error(Errc::resolution, fmt::format("mesh spacing {:.4g} exceeds eps^2/4 = {:.4g} at eps = {}",
                                                p.mesh.max_spacing(), limit, p.eps));
    }
  } else {
    if (p.table == nullptr) throw Error(Errc::config, "effective mode needs a flux table");
    if (p.table->dim() != p.mesh.dim()) throw Error(Errc::shape, "flux table and mesh dimensions differ");
  }
}

}  // namespace

SolveReport solve(const EllipticProblem& problem, double tol, const SolveOptions& options) {
  if (!(tol > 0.0)) throw Error(Errc::domain, "solver tolerance must be positive");
  check_problem(problem);
  const Mesh& mesh = problem.mesh;
  const int d = mesh.dim();
  const fem::Discretization disc(mesh);
  const std::vector<double> load = disc.lumped_load(problem.f);
  for (double v : load) {
    if (!std::isfinite(v)) throw Error(Errc::domain, "right-hand side is not finite on the mesh");
  }

  const coeff::Coefficient* c = problem.coefficient;
  double f_norm = std::numeric_limits<double>::quiet_NaN();
  if (c != nullptr) {
    f_norm = fields::luxemburg_norm(Field::sample(coarse_copy(mesh), problem.f), nfunc::complementary(c->phi));
    if (!std::isfinite(f_norm)) throw Error(Errc::domain, "right-hand side has no finite complementary norm");
  }

  bool clamped = false;
  fem::FluxCallback flux;
  fem::NewtonOptions opt;
  opt.tol = tol;
  opt.max_iterations = options.max_iterations;
  opt.linear = options.linear;
  if (problem.mode == FluxMode::direct) {
    const double e1 = problem.eps;
    const double e2 = e1 * e1;
    flux = [c, e1, e2, d](std::size_t, const Point& x, double u, std::span<const double> g) {
      const Point y{x[0] / e1, x[1] / e1};
      const Point z{x[0] / e2, x[1] / e2};
      const coeff::FluxValue v =
          c->flux(std::span<const double>(y.data(), d), std::span<const double>(z.data(), d), u, g);
      return fem::QpFlux{v.a, v.da_dlambda, v.da_dzeta};
    };
    opt.u_dependent = c->zeta_dependent;
  } else {
    const cell::FluxTable* table = problem.table;
    flux = [table, &clamped, d](std::size_t, const Point&, double u, std::span<const double> g) {
      const cell::FluxTable::Query q = table->evaluate(u, fem::Vec{g[0], d > 1 ? g[1] : 0.0});
      if (q.clamped) clamped = true;
      return fem::QpFlux{q.q, q.dq_dxi, q.dq_dr};
    };
    opt.u_dependent = table->r_grid().size() > 1;
    opt.symmetric = d == 1;
  }

  fem::NewtonResult res =
      fem::solve_monotone(disc, flux, load, std::vector<double>(mesh.node_count(), 0.0), opt);

  // The final evaluation is the one the report describes; it also fixes the
  // clamp flag to the accepted iterate.
  clamped = false;
  const std::vector<fem::QpFlux> values = disc.evaluate(res.u, flux);
  double energy = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) {
    double u;
    fem::Vec g;
    disc.interpolate(res.u, q, u, g);
    energy += disc.qp_weight() * (values[q].a[0] * g[0] + values[q].a[1] * g[1]);
  }
  for (std::size_t i = 0; i < load.size(); ++i) energy -= load[i] * res.u[i];

  Field solution(mesh, fields::FieldKind::scalar, std::move(res.u));
  const double gradient_norm = c != nullptr ? fields::luxemburg_norm(fields::gradient(solution), c->phi)
                                            : std::numeric_limits<double>::quiet_NaN();
  return SolveReport{std::move(solution), res.residual, res.iterations, res.picard_steps, energy,
                     clamped,             f_norm,       gradient_norm,  std::move(res.history)};
}

SolutionRange solution_range(const Field& u) {
  SolutionRange r;
  for (double v : u.values()) r.u_max = std::max(r.u_max, std::abs(v));
  r.gradient_max = fields::gradient(u).max_magnitude();
  return r;
}

}  // namespace reiterhom::solver

#include "reiterhom/cell.hpp"

#include <cmath>

#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::cell {

namespace {

using fields::Mesh;
using fields::Point;

double default_tol(const coeff::Coefficient& c, const CellOptions& o) {
  if (o.tol > 0.0) return o.tol;
  return c.linear_in_gradient ? 1e-10 : 1e-8;
}

void check_cell_mesh(const coeff::Coefficient& c, const Mesh& m) {
  if (!m.periodic()) throw Error(Errc::domain, "cell problems need a periodic mesh");
  if (m.dim() != c.dim) {
    throw Error(Errc::shape, fmt::format("cell mesh has dimension {}, coefficient {}", m.dim(), c.dim));
  }
}

// Solves the periodic problem for the corrector with gradient shift xi and
// fills the averaged flux and, optionally, its derivative in xi.
CellSolution solve_periodic(const fem::Discretization& disc, const fem::FluxCallback& flux, Vec xi, double tol,
                            fem::LinearSolverKind linear, bool with_tangent, std::vector<double> initial) {
  const Mesh& m = disc.mesh();
  if (initial.size() != m.node_count()) initial.assign(m.node_count(), 0.0);
  fem::NewtonOptions opt;
  opt.tol = tol;
  opt.shift = xi;
  opt.linear = linear;
  fem::NewtonResult res = fem::solve_monotone(disc, flux, {}, std::move(initial), opt);

  const std::vector<fem::QpFlux> values = disc.evaluate(res.u, flux, xi);
  const double vol = m.volume();
  const Vec integral = disc.integrate_flux(values);
  const int d = m.dim();

  Mat tangent{};
  for (const fem::QpFlux& f : values) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) tangent[i][j] += disc.qp_weight() * f.da_dg[i][j];
    }
  }
  if (with_tangent) {
    fem::SparseMatrix k;
    disc.jacobian(values, false, k);
    fem::LinearSolver solver(disc, linear, true);
    solver.set_tolerance(1e-10);
    // A vanishing Jacobian (degenerate flux at zero gradient) leaves the
    // averaged derivative as the tangent.
    if (solver.compute(k)) {
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXd chi;
        if (!solver.solve(-disc.shift_derivative(values, j), chi)) continue;
        const std::vector<double> nodal = disc.to_nodal(chi);
        for (std::size_t q = 0; q < values.size(); ++q) {
          double u;
          Vec g;
          disc.interpolate(nodal, q, u, g);
          const fem::QpFlux& f = values[q];
          for (int i = 0; i < d; ++i) {
            tangent[i][j] += disc.qp_weight() * (f.da_dg[i][0] * g[0] + f.da_dg[i][1] * g[1]);
          }
        }
      }
    }
  }
  for (auto& row : tangent) {
    for (double& v : row) v /= vol;
  }

  CellSolution out{fields::Field(m, fields::FieldKind::scalar, std::move(res.u)), res.residual,
                   {integral[0] / vol, integral[1] / vol}, tangent, res.iterations};
  return out;
}

fem::FluxCallback z_flux(const coeff::Coefficient& c, std::span<const double> y, double r) {
  const int d = c.dim;
  const Point yy{y[0], d > 1 ? y[1] : 0.0};
  return [&c, yy, r, d](std::size_t, const Point& z, double, std::span<const double> g) {
    const coeff::FluxValue f =
        c.flux(std::span<const double>(yy.data(), d), std::span<const double>(z.data(), d), r, g);
    return fem::QpFlux{f.a, f.da_dlambda, {0.0, 0.0}};
  };
}

std::int64_t quantize(double v) { return std::llround(v * 1e8); }

}  // namespace

CellSolution solve_cell_z(const coeff::Coefficient& c, std::span<const double> y, double r, Vec xi,
                          const fields::Mesh& mesh_z, const CellOptions& options,
                          std::span<const double> warm_start) {
  check_cell_mesh(c, mesh_z);
  const fem::Discretization disc(mesh_z);
  return solve_periodic(disc, z_flux(c, y, r), xi, default_tol(c, options), options.linear, options.tangent,
                        std::vector<double>(warm_start.begin(), warm_start.end()));
}

Vec effective_h(const coeff::Coefficient& c, std::span<const double> y, double r, Vec xi,
                const fields::Mesh& mesh_z, const CellOptions& options) {
  CellOptions o = options;
  o.tangent = false;
  return solve_cell_z(c, y, r, xi, mesh_z, o).flux_sample;
}

std::size_t NestedCellSolver::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<std::size_t>{}(k.qp);
  for (std::int64_t v : {k.r, k.x0, k.x1}) h = h * 1000003u ^ std::hash<std::int64_t>{}(v);
  return h;
}

NestedCellSolver::NestedCellSolver(coeff::Coefficient c, fields::Mesh mesh_y, fields::Mesh mesh_z,
                                   CellOptions options)
    : coeff_(std::move(c)), y_((check_cell_mesh(coeff_, mesh_y), mesh_y)),
      z_((check_cell_mesh(coeff_, mesh_z), mesh_z)), options_(options), tol_(default_tol(coeff_, options)) {}

std::size_t NestedCellSolver::cache_size() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

fem::QpFlux NestedCellSolver::h_at(std::size_t qp, const Point& y, double r, Vec g) const {
  const Key key{qp, quantize(r), quantize(g[0]), quantize(g[1])};
  {
    std::shared_lock lock(cache_mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      // First-order correction from the stored point keeps the flux
      // continuous in g across the quantization cell.
      const Entry& e = it->second;
      fem::QpFlux out{e.h, e.tangent, {0.0, 0.0}};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) out.a[i] += e.tangent[i][j] * (g[j] - e.g[j]);
      }
      return out;
    }
  }
  ++misses_;
  std::vector<double> warm;
  {
    std::lock_guard lock(warm_mutex_);
    const auto it = warm_.find(qp);
    if (it != warm_.end()) warm = it->second;
  }
  const double inner_tol = std::max(1e-2 * tol_, 1e-11);
  CellSolution s = solve_periodic(z_, z_flux(coeff_, std::span<const double>(y.data(), coeff_.dim), r), g,
                                  inner_tol, options_.inner_linear, true, std::move(warm));
  {
    std::lock_guard lock(warm_mutex_);
    const auto v = s.corrector.values();
    warm_[qp].assign(v.begin(), v.end());
  }
  {
    std::unique_lock lock(cache_mutex_);
    if (cache_.size() >= options_.cache_budget) {
      throw Error(Errc::resource, fmt::format("h-cache budget of {} entries exhausted", options_.cache_budget));
    }
    cache_.emplace(key, Entry{s.flux_sample, s.tangent, g});
  }
  return {s.flux_sample, s.tangent, {0.0, 0.0}};
}

CellSolution NestedCellSolver::solve_y(double r, Vec xi) const {
  const int d = coeff_.dim;
  const fem::FluxCallback flux = [this, r, d](std::size_t qp, const Point& y, double, std::span<const double> g) {
    return h_at(qp, y, r, Vec{g[0], d > 1 ? g[1] : 0.0});
  };
  return solve_periodic(y_, flux, xi, tol_, options_.linear, options_.tangent, {});
}

CellSolution NestedCellSolver::solve_z(std::span<const double> y, double r, Vec xi) const {
  return solve_periodic(z_, z_flux(coeff_, y, r), xi, tol_, options_.linear, options_.tangent, {});
}

CellSolution solve_cell_y(const coeff::Coefficient& c, double r, Vec xi, const fields::Mesh& mesh_y,
                          const fields::Mesh& mesh_z, const CellOptions& options) {
  const NestedCellSolver solver(c, mesh_y, mesh_z, options);
  return solver.solve_y(r, xi);
}

}  // namespace reiterhom::cell

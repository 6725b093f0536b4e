#include "reiterhom/fem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "reiterhom/error.hpp"
#include "spectral.hpp"

namespace reiterhom::fem {

Discretization::Discretization(Mesh mesh) : mesh_(std::move(mesh)) {
  const int d = mesh_.dim();
  const int n = mesh_.cells_per_axis();
  const bool periodic = mesh_.periodic();
  auto next = [&](int i) { return periodic ? mesh_.wrap(i + 1) : i + 1; };

  if (d == 1) {
    const double h = mesh_.spacing(0);
    elements_.reserve(2 * static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
      elements_.push_back(mesh_.node_index(e));
      elements_.push_back(mesh_.node_index(next(e)));
    }
    qp_weight_ = h;
    shape_[0] = {0.5, 0.5, 0.0, 0.0};
    grad_[0][0] = {-1.0 / h, 0.0};
    grad_[0][1] = {1.0 / h, 0.0};
    qp_offset_[0] = {0.5 * h, 0.0};
  } else {
    const double hx = mesh_.spacing(0);
    const double hy = mesh_.spacing(1);
    elements_.reserve(4 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        elements_.push_back(mesh_.node_index(i, j));
        elements_.push_back(mesh_.node_index(next(i), j));
        elements_.push_back(mesh_.node_index(i, next(j)));
        elements_.push_back(mesh_.node_index(next(i), next(j)));
      }
    }
    qp_weight_ = 0.25 * hx * hy;
    const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
    const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
    const std::array<std::array<double, 2>, 4> ref{{{g0, g0}, {g1, g0}, {g0, g1}, {g1, g1}}};
    for (int k = 0; k < 4; ++k) {
      const double s = ref[k][0];
      const double t = ref[k][1];
      shape_[k] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
      grad_[k][0] = {-(1 - t) / hx, -(1 - s) / hy};
      grad_[k][1] = {(1 - t) / hx, -s / hy};
      grad_[k][2] = {-t / hx, (1 - s) / hy};
      grad_[k][3] = {t / hx, s / hy};
      qp_offset_[k] = {s * hx, t * hy};
    }
  }

  dof_of_.assign(mesh_.node_count(), -1);
  for (std::size_t i = 0; i < mesh_.node_count(); ++i) {
    if (periodic || !mesh_.on_boundary(i)) dof_of_[i] = static_cast<int>(dofs_++);
  }
  if (dofs_ == 0) throw Error(Errc::shape, "discretization has no unknowns");
  build_pattern();
}

void Discretization::build_pattern() {
  const int m = nodes_per_element();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(elements_.size() * m);
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int a = 0; a < m; ++a) {
      const int ra = dof_of_[elements_[e * m + a]];
      if (ra < 0) continue;
      for (int b = 0; b < m; ++b) {
        const int cb = dof_of_[elements_[e * m + b]];
        if (cb >= 0) trip.emplace_back(ra, cb, 0.0);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(dofs_);
  pattern_.resize(n, n);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();

  slot_.assign(element_count() * m * m, -1);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int a = 0; a < m; ++a) {
      const int ra = dof_of_[elements_[e * m + a]];
      if (ra < 0) continue;
      for (int b = 0; b < m; ++b) {
        const int cb = dof_of_[elements_[e * m + b]];
        if (cb < 0) continue;
        const int* first = inner + outer[cb];
        const int* last = inner + outer[cb + 1];
        slot_[(e * m + a) * m + b] = static_cast<int>(std::lower_bound(first, last, ra) - inner);
      }
    }
  }
}

Point Discretization::qp_coords(std::size_t qp) const noexcept {
  const std::size_t e = qp / qp_per_element();
  const int k = static_cast<int>(qp % qp_per_element());
  const Point origin = mesh_.node(elements_[e * nodes_per_element()]);
  // The first node of a wrapped periodic element is its lower corner.
  return {origin[0] + qp_offset_[k][0], origin[1] + qp_offset_[k][1]};
}

void Discretization::interpolate(std::span<const double> nodal, std::size_t qp, double& u, Vec& g) const noexcept {
  const std::size_t e = qp / qp_per_element();
  const int k = static_cast<int>(qp % qp_per_element());
  const int m = nodes_per_element();
  u = 0.0;
  g = {0.0, 0.0};
  for (int a = 0; a < m; ++a) {
    const double v = nodal[elements_[e * m + a]];
    u += shape_[k][a] * v;
    g[0] += grad_[k][a][0] * v;
    g[1] += grad_[k][a][1] * v;
  }
}

std::vector<QpFlux> Discretization::evaluate(std::span<const double> nodal, const FluxCallback& flux,
                                             Vec shift) const {
  std::vector<QpFlux> out(qp_count());
  const int d = dim();
  for (std::size_t q = 0; q < out.size(); ++q) {
    double u;
    Vec g;
    interpolate(nodal, q, u, g);
    g[0] += shift[0];
    g[1] += shift[1];
    out[q] = flux(q, qp_coords(q), u, std::span<const double>(g.data(), d));
  }
  return out;
}

Eigen::VectorXd Discretization::residual(const std::vector<QpFlux>& values, std::span<const double> load) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_));
  const int m = nodes_per_element();
  const int nq = qp_per_element();
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      const QpFlux& f = values[e * nq + k];
      for (int a = 0; a < m; ++a) {
        const int ra = dof_of_[elements_[e * m + a]];
        if (ra >= 0) r[ra] += qp_weight_ * (f.a[0] * grad_[k][a][0] + f.a[1] * grad_[k][a][1]);
      }
    }
  }
  if (!load.empty()) {
    for (std::size_t i = 0; i < dof_of_.size(); ++i) {
      if (dof_of_[i] >= 0) r[dof_of_[i]] -= load[i];
    }
  }
  return r;
}

void Discretization::jacobian(const std::vector<QpFlux>& values, bool with_u_terms, SparseMatrix& out) const {
  if (out.nonZeros() != pattern_.nonZeros() || out.rows() != pattern_.rows()) out = pattern_;
  double* val = out.valuePtr();
  std::fill(val, val + out.nonZeros(), 0.0);
  const int m = nodes_per_element();
  const int nq = qp_per_element();
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      const QpFlux& f = values[e * nq + k];
      for (int b = 0; b < m; ++b) {
        const Vec& gb = grad_[k][b];
        const Vec dg{f.da_dg[0][0] * gb[0] + f.da_dg[0][1] * gb[1], f.da_dg[1][0] * gb[0] + f.da_dg[1][1] * gb[1]};
        for (int a = 0; a < m; ++a) {
          const int s = slot_[(e * m + a) * m + b];
          if (s < 0) continue;
          const Vec& ga = grad_[k][a];
          double v = ga[0] * dg[0] + ga[1] * dg[1];
          if (with_u_terms) v += (f.da_du[0] * ga[0] + f.da_du[1] * ga[1]) * shape_[k][b];
          val[s] += qp_weight_ * v;
        }
      }
    }
  }
}

bool Discretization::secant(const std::vector<QpFlux>& values, std::span<const double> nodal, Vec shift,
                            SparseMatrix& out) const {
  if (out.nonZeros() != pattern_.nonZeros() || out.rows() != pattern_.rows()) out = pattern_;
  double* val = out.valuePtr();
  std::fill(val, val + out.nonZeros(), 0.0);
  const int m = nodes_per_element();
  const int nq = qp_per_element();
  const int d = dim();
  std::vector<double> mu(values.size());
  double mu_max = 0.0;
  for (std::size_t q = 0; q < values.size(); ++q) {
    const QpFlux& f = values[q];
    double u;
    Vec g;
    interpolate(nodal, q, u, g);
    g[0] += shift[0];
    g[1] += shift[1];
    const double g2 = g[0] * g[0] + g[1] * g[1];
    mu[q] = g2 > 1e-24 ? (f.a[0] * g[0] + f.a[1] * g[1]) / g2 : (f.da_dg[0][0] + f.da_dg[1][1]) / d;
    if (!(mu[q] >= 0.0) || !std::isfinite(mu[q])) return false;
    mu_max = std::max(mu_max, mu[q]);
  }
  // Degenerate fluxes (p-Laplace with p > 2) have zero modulus where the
  // gradient vanishes; floor it so the matrix stays definite.
  const double floor = mu_max > 0.0 ? 1e-6 * mu_max : 1.0;
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      const double w = qp_weight_ * std::max(mu[e * nq + k], floor);
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          const int s = slot_[(e * m + a) * m + b];
          if (s >= 0) val[s] += w * (grad_[k][a][0] * grad_[k][b][0] + grad_[k][a][1] * grad_[k][b][1]);
        }
      }
    }
  }
  return true;
}

Eigen::VectorXd Discretization::shift_derivative(const std::vector<QpFlux>& values, int j) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs_));
  const int m = nodes_per_element();
  const int nq = qp_per_element();
  for (std::size_t e = 0; e < element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      const QpFlux& f = values[e * nq + k];
      const Vec col{f.da_dg[0][j], f.da_dg[1][j]};
      for (int a = 0; a < m; ++a) {
        const int ra = dof_of_[elements_[e * m + a]];
        if (ra >= 0) r[ra] += qp_weight_ * (grad_[k][a][0] * col[0] + grad_[k][a][1] * col[1]);
      }
    }
  }
  return r;
}

Vec Discretization::integrate_flux(const std::vector<QpFlux>& values) const {
  Vec s{0.0, 0.0};
  for (const QpFlux& f : values) {
    s[0] += qp_weight_ * f.a[0];
    s[1] += qp_weight_ * f.a[1];
  }
  return s;
}

std::vector<double> Discretization::to_nodal(const Eigen::VectorXd& x) const {
  std::vector<double> out(dof_of_.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (dof_of_[i] >= 0) out[i] = x[dof_of_[i]];
  }
  return out;
}

Eigen::VectorXd Discretization::to_dofs(std::span<const double> nodal) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dofs_));
  for (std::size_t i = 0; i < dof_of_.size(); ++i) {
    if (dof_of_[i] >= 0) x[dof_of_[i]] = nodal[i];
  }
  return x;
}

std::vector<double> Discretization::lumped_load(const std::function<double(Point)>& f) const {
  std::vector<double> out(mesh_.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mesh_.weight(i) * f(mesh_.node(i));
  return out;
}

void Discretization::project_zero_mean(std::vector<double>& nodal) const {
  if (!mesh_.periodic()) return;
  double s = 0.0;
  for (double v : nodal) s += v;
  s /= static_cast<double>(nodal.size());
  for (double& v : nodal) v -= s;
}

struct LinearSolver::State {
  enum class Path { jacobi, spectral, direct };
  SparseMatrix matrix;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, detail::SpectralPreconditioner> fft_cg;
  Eigen::BiCGSTAB<SparseMatrix, detail::SpectralPreconditioner> fft_bicg;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix> lu;
  Path path = Path::jacobi;
  bool spectral_ready = false;
};

LinearSolver::LinearSolver(const Discretization& disc, LinearSolverKind kind, bool symmetric)
    : disc_(disc), kind_(kind), symmetric_(symmetric), state_(std::make_unique<State>()) {
  if (kind == LinearSolverKind::spectral && !disc.mesh().periodic()) {
    throw Error(Errc::domain, "the spectral linear solver needs a periodic mesh");
  }
}

LinearSolver::~LinearSolver() = default;

namespace {

template <class Solver>
bool run_compute(Solver& solver, const SparseMatrix& m, int maxit) {
  solver.setMaxIterations(maxit);
  solver.compute(m);
  return solver.info() == Eigen::Success;
}

template <class Solver>
bool run_solve(Solver& solver, double tolerance, const Eigen::VectorXd& b, Eigen::VectorXd& x, int& iterations) {
  solver.setTolerance(tolerance);
  x = solver.solve(b);
  iterations = static_cast<int>(solver.iterations());
  return solver.info() == Eigen::Success;
}

}  // namespace

bool LinearSolver::compute(const SparseMatrix& k) {
  State& s = *state_;
  const bool periodic = disc_.mesh().periodic();
  using Path = State::Path;
  switch (kind_) {
    case LinearSolverKind::iterative: s.path = Path::jacobi; break;
    case LinearSolverKind::spectral: s.path = Path::spectral; break;
    case LinearSolverKind::direct: s.path = Path::direct; break;
    case LinearSolverKind::automatic: s.path = periodic ? Path::spectral : Path::direct; break;
  }
  if (symmetric_) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      if (!(k.coeff(i, i) > 0.0)) return false;
    }
  }
  s.matrix = k;
  const int maxit = static_cast<int>(std::min<std::size_t>(10 * disc_.dof_count(), 1000000));
  if (s.path == Path::spectral) {
    if (!s.spectral_ready) {
      s.fft_cg.preconditioner().setup(disc_.mesh());
      s.fft_bicg.preconditioner().setup(disc_.mesh());
      s.spectral_ready = true;
    }
    return symmetric_ ? run_compute(s.fft_cg, s.matrix, maxit) : run_compute(s.fft_bicg, s.matrix, maxit);
  }
  if (s.path == Path::jacobi) {
    return symmetric_ ? run_compute(s.cg, s.matrix, maxit) : run_compute(s.bicg, s.matrix, maxit);
  }
  if (periodic) {
    // Pin unknown 0 to remove the constant kernel.
    for (Eigen::Index c = 0; c < s.matrix.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(s.matrix, c); it; ++it) {
        if (it.row() == 0 || it.col() == 0) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
      }
    }
  }
  if (symmetric_) {
    s.ldlt.compute(s.matrix);
    if (s.ldlt.info() != Eigen::Success) return false;
    return (s.ldlt.vectorD().array() > 0.0).all();
  }
  s.lu.analyzePattern(s.matrix);
  s.lu.factorize(s.matrix);
  return s.lu.info() == Eigen::Success;
}

bool LinearSolver::solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
  State& s = *state_;
  const bool periodic = disc_.mesh().periodic();
  Eigen::VectorXd b = rhs;
  if (periodic) b.array() -= b.mean();
  bool ok = true;
  using Path = State::Path;
  if (s.path == Path::spectral) {
    ok = symmetric_ ? run_solve(s.fft_cg, tolerance_, b, x, iterations_)
                    : run_solve(s.fft_bicg, tolerance_, b, x, iterations_);
  } else if (s.path == Path::jacobi) {
    ok = symmetric_ ? run_solve(s.cg, tolerance_, b, x, iterations_) : run_solve(s.bicg, tolerance_, b, x, iterations_);
  } else {
    if (periodic) b[0] = 0.0;
    x = symmetric_ ? Eigen::VectorXd(s.ldlt.solve(b)) : Eigen::VectorXd(s.lu.solve(b));
    iterations_ = 1;
    ok = x.allFinite();
  }
  if (periodic) x.array() -= x.mean();
  return ok;
}

NewtonResult solve_monotone(const Discretization& disc, const FluxCallback& flux, std::span<const double> load,
                            std::vector<double> initial, const NewtonOptions& opt) {
  NewtonResult res;
  res.u = std::move(initial);
  if (res.u.size() != disc.mesh().node_count()) throw Error(Errc::shape, "initial guess does not match the mesh");
  for (std::size_t i = 0; i < res.u.size(); ++i) {
    if (disc.dof_of(i) < 0) res.u[i] = 0.0;
  }
  disc.project_zero_mean(res.u);

  std::vector<QpFlux> values = disc.evaluate(res.u, flux, opt.shift);
  Eigen::VectorXd r = disc.residual(values, load);
  double norm = r.norm();
  const double norm0 = norm;
  res.history.push_back(norm);

  // Armijo backtracking along dx; updates the iterate on success.
  auto line_search = [&](const Eigen::VectorXd& dx) {
    const std::vector<double> step = disc.to_nodal(dx);
    double alpha = 1.0;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      std::vector<double> trial(res.u);
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * step[i];
      disc.project_zero_mean(trial);
      std::vector<QpFlux> tv = disc.evaluate(trial, flux, opt.shift);
      Eigen::VectorXd tr = disc.residual(tv, load);
      const double tn = tr.norm();
      if (std::isfinite(tn) && tn <= (1.0 - 1e-4 * alpha) * norm) {
        res.u = std::move(trial);
        values = std::move(tv);
        r = std::move(tr);
        norm = tn;
        return true;
      }
      alpha *= 0.5;
    }
    return false;
  };

  const bool symmetric = opt.symmetric && !opt.u_dependent;
  LinearSolver newton_solver(disc, opt.linear, symmetric);
  SparseMatrix k;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (norm <= opt.tol) {
      res.residual = norm;
      return res;
    }
    ++res.iterations;
    disc.jacobian(values, opt.u_dependent, k);
    newton_solver.set_tolerance(std::clamp(std::max(std::min(1e-2, norm / norm0), 0.1 * opt.tol / norm), 1e-12, 0.5));
    Eigen::VectorXd dx;
    bool accepted = newton_solver.compute(k) && newton_solver.solve(-r, dx) && dx.allFinite() && line_search(dx);
    if (!accepted) {
      if (!disc.secant(values, res.u, opt.shift, k)) {
        throw SolverError(Errc::coercivity, "linearization is not positive and the secant modulus is not positive",
                          res.history);
      }
      LinearSolver picard(disc, opt.linear, true);
      if (!picard.compute(k)) {
        throw SolverError(Errc::coercivity, "secant matrix is not positive definite", res.history);
      }
      accepted = picard.solve(-r, dx) && dx.allFinite() && line_search(dx);
      ++res.picard_steps;
      if (!accepted) {
        throw SolverError(Errc::solver,
                          fmt::format("no descent step at iteration {} (residual {:.3e})", it, norm), res.history);
      }
    }
    res.history.push_back(norm);
  }
  if (norm <= opt.tol) {
    res.residual = norm;
    return res;
  }
  throw SolverError(Errc::solver,
                    fmt::format("Newton did not converge in {} iterations (residual {:.3e})", opt.max_iterations, norm),
                    res.history);
}

}  // namespace reiterhom::fem

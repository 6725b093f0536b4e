#pragma once

// Lowest-order discretization of div a(x, u, Du) = f on structured meshes:
// P1 elements with midpoint quadrature in 1D (the conservative
// second-order difference scheme) and Q1 elements with 2x2 Gauss points in
// 2D. Periodic meshes keep every node as an unknown and fix the constant by
// zero-mean projection; bounded meshes eliminate the boundary nodes.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "reiterhom/mesh.hpp"

namespace reiterhom::fem {

using fields::Mesh;
using fields::Point;
using Vec = std::array<double, 2>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct QpFlux {
  Vec a{0.0, 0.0};
  std::array<Vec, 2> da_dg{};
  Vec da_du{0.0, 0.0};
};

/// Flux at quadrature point `qp` (coordinates x) for the value u and the
/// gradient g of the discrete field there.
using FluxCallback = std::function<QpFlux(std::size_t qp, const Point& x, double u, std::span<const double> g)>;

class Discretization {
 public:
  explicit Discretization(Mesh mesh);

  const Mesh& mesh() const noexcept { return mesh_; }
  int dim() const noexcept { return mesh_.dim(); }
  int qp_per_element() const noexcept { return dim() == 1 ? 1 : 4; }
  int nodes_per_element() const noexcept { return dim() == 1 ? 2 : 4; }
  std::size_t element_count() const noexcept { return elements_.size() / nodes_per_element(); }
  std::size_t qp_count() const noexcept { return element_count() * qp_per_element(); }
  Point qp_coords(std::size_t qp) const noexcept;
  double qp_weight() const noexcept { return qp_weight_; }

  std::size_t dof_count() const noexcept { return dofs_; }
  /// Unknown index of a node, -1 for eliminated boundary nodes.
  int dof_of(std::size_t node) const noexcept { return dof_of_[node]; }

  /// Value and gradient of the nodal field at a quadrature point.
  void interpolate(std::span<const double> nodal, std::size_t qp, double& u, Vec& g) const noexcept;

  /// Flux at every quadrature point; `shift` is added to every gradient.
  std::vector<QpFlux> evaluate(std::span<const double> nodal, const FluxCallback& flux, Vec shift = {0.0, 0.0}) const;

  /// Residual r_i = sum_q w a . grad N_i - load_i over unknowns.
  Eigen::VectorXd residual(const std::vector<QpFlux>& values, std::span<const double> load) const;
  /// Jacobian of the residual; u-derivative terms only when requested.
  void jacobian(const std::vector<QpFlux>& values, bool with_u_terms, SparseMatrix& out) const;
  /// Secant (frozen coefficient) matrix with the isotropic modulus
  /// a . g / |g|^2 per point, zero moduli floored at 1e-6 of the largest;
  /// returns false if some modulus is negative or not finite.
  bool secant(const std::vector<QpFlux>& values, std::span<const double> nodal, Vec shift, SparseMatrix& out) const;
  /// Column j of sum_q w grad N_i . (da/dg e_j), the right-hand side of the
  /// sensitivity problem in a constant gradient shift.
  Eigen::VectorXd shift_derivative(const std::vector<QpFlux>& values, int j) const;
  /// sum_q w a(q), the integral of the flux.
  Vec integrate_flux(const std::vector<QpFlux>& values) const;

  /// Unknown vector <-> nodal vector (eliminated nodes are zero).
  std::vector<double> to_nodal(const Eigen::VectorXd& x) const;
  Eigen::VectorXd to_dofs(std::span<const double> nodal) const;
  /// Lumped load vector sum_i w_i f(x_i) on the nodes.
  std::vector<double> lumped_load(const std::function<double(Point)>& f) const;
  void project_zero_mean(std::vector<double>& nodal) const;

 private:
  void build_pattern();

  Mesh mesh_;
  std::vector<std::size_t> elements_;  // node ids, nodes_per_element() per element
  std::vector<int> dof_of_;
  std::size_t dofs_ = 0;
  double qp_weight_ = 0.0;
  // Shape values and gradients per local quadrature point and local node.
  std::array<std::array<double, 4>, 4> shape_{};
  std::array<std::array<Vec, 4>, 4> grad_{};
  std::array<Point, 4> qp_offset_{};
  SparseMatrix pattern_;
  std::vector<int> slot_;  // element-local (a, b) -> index into pattern values, -1 if eliminated
};

/// iterative: CG (BiCGSTAB when unsymmetric) with a Jacobi preconditioner.
/// spectral: the same Krylov methods preconditioned by the FFT inverse of the
/// constant-coefficient stiffness matrix; periodic meshes only.
/// automatic: spectral on periodic meshes, direct otherwise.
enum class LinearSolverKind { automatic, iterative, spectral, direct };

/// Solves with one matrix for many right-hand sides. Periodic systems are
/// singular with constant kernel; the direct path pins the first unknown and
/// both paths return zero-mean corrections.
class LinearSolver {
 public:
  LinearSolver(const Discretization& disc, LinearSolverKind kind, bool symmetric);
  ~LinearSolver();
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;

  /// False when the matrix is detected as not positive definite or the
  /// factorization fails.
  bool compute(const SparseMatrix& k);
  /// False when the iteration did not reach the tolerance.
  bool solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x);
  int last_iterations() const noexcept { return iterations_; }
  /// Relative residual tolerance of the iterative path (default 1e-12).
  void set_tolerance(double rel) noexcept { tolerance_ = rel; }

 private:
  struct State;
  const Discretization& disc_;
  LinearSolverKind kind_;
  bool symmetric_;
  std::unique_ptr<State> state_;
  int iterations_ = 0;
  double tolerance_ = 1e-12;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iterations = 60;
  int max_halvings = 30;
  bool symmetric = true;
  bool u_dependent = false;
  LinearSolverKind linear = LinearSolverKind::automatic;
  /// Constant gradient added to the discrete gradient (cell problems).
  Vec shift{0.0, 0.0};
};

struct NewtonResult {
  std::vector<double> u;  // nodal values
  double residual = 0.0;
  int iterations = 0;
  int picard_steps = 0;
  std::vector<double> history;
};

/// Damped Newton with Armijo backtracking and a frozen-coefficient fallback.
/// Iterative linear solves use the forcing term
/// min(1e-2, |R_k| / |R_0|), bounded below by 1e-12 and by 0.1 tol / |R_k|.
/// Throws SolverError (Errc::solver) on non-convergence and Errc::coercivity
/// when neither the Jacobian nor the secant matrix is positive.
NewtonResult solve_monotone(const Discretization& disc, const FluxCallback& flux, std::span<const double> load,
                            std::vector<double> initial, const NewtonOptions& options);

}  // namespace reiterhom::fem

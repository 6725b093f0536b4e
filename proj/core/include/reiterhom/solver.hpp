#pragma once

// Monotone elliptic solves on a bounded domain with homogeneous Dirichlet
// data: the oscillating problem with flux a(x/eps, x/eps^2, u, Du) and the
// homogenized problem with a tabulated effective flux q(u, Du).

#include <functional>
#include <vector>

#include "reiterhom/cell.hpp"
#include "reiterhom/coeff.hpp"
#include "reiterhom/fem.hpp"
#include "reiterhom/field.hpp"
#include "reiterhom/flux_table.hpp"
#include "reiterhom/multiscale.hpp"

namespace reiterhom::solver {

using fields::Field;
using fields::Mesh;
using fields::Point;

enum class FluxMode { direct, effective };

struct EllipticProblem {
  Mesh mesh = Mesh::interval(0.0, 1.0, 2);
  FluxMode mode = FluxMode::direct;
  /// Required in direct mode; in effective mode only used for norms.
  const coeff::Coefficient* coefficient = nullptr;
  double eps = 0.0;
  const cell::FluxTable* table = nullptr;
  std::function<double(Point)> f;
};

struct SolveOptions {
  int max_iterations = 60;
  fem::LinearSolverKind linear = fem::LinearSolverKind::automatic;
};

struct SolveReport {
  Field solution;
  double residual = 0.0;
  int newton_iters = 0;
  int picard_steps = 0;
  /// int flux . Du - f u
  double energy = 0.0;
  /// Some effective-flux query left the table range.
  bool clamped = false;
  /// Luxemburg norms of f in the complementary class and of Du (NaN
  /// without a coefficient).
  double f_norm = 0.0;
  double gradient_norm = 0.0;
  std::vector<double> history;
};

/// Throws Errc::resolution in direct mode when the mesh spacing exceeds
/// eps^2 / 4, Errc::domain for a periodic mesh or non-finite f, and
/// SolverError on divergence.
SolveReport solve(const EllipticProblem& problem, double tol, const SolveOptions& options = {});

/// Largest |u| and |Du| of a solution, used to size flux tables.
struct SolutionRange {
  double u_max = 0.0;
  double gradient_max = 0.0;
};
SolutionRange solution_range(const Field& u);

/// Cell correctors of a macroscopic solution, tabulated on a coarse bounded
/// x-mesh: pi_1 on the Y grid and pi_2 on Y x Z, with their cell gradients.
struct CorrectorSet {
  int dim = 1;
  Field u0;
  Field du0;
  fields::TabulatedTerm pi1;
  fields::TabulatedTerm pi2;
  std::array<fields::TabulatedTerm, 2> grad_pi1;
  std::array<fields::TabulatedTerm, 2> grad_pi2;
  /// Cell solves performed (one Y problem per x node, one Z problem per
  /// x node and Y node).
  std::size_t cell_solves = 0;
};

struct CorrectorOptions {
  int recon_n = 32;
  cell::CellOptions cell;
  int jobs = 1;
};

CorrectorSet compute_correctors(const Field& u0, const coeff::Coefficient& c, const Mesh& mesh_y,
                                const Mesh& mesh_z, const CorrectorOptions& options = {});

struct Reconstruction {
  /// G_eps = Du0 + D_y pi_1(x/eps) + D_z pi_2(x/eps, x/eps^2)
  Field gradient;
  /// u0 + eps u_1 + eps^2 u_2
  Field field;
};

Reconstruction corrector_reconstruct(const CorrectorSet& correctors, double eps, const Mesh& fine);

}  // namespace reiterhom::solver

#pragma once

// Convergence studies: validate -> upscale -> macro solve -> eps solves ->
// corrector reconstruction -> norms and trend checks.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reiterhom/coeff.hpp"
#include "reiterhom/config.hpp"
#include "reiterhom/flux_table.hpp"
#include "reiterhom/solver.hpp"

namespace reiterhom::harness {

/// Periodic cells of the coefficient at the configured resolutions.
fields::Mesh cell_mesh_y(const coeff::Coefficient& c, int n);
fields::Mesh cell_mesh_z(const coeff::Coefficient& c, int n);

/// Flux table on [-xi_max, xi_max]^d (and [-r_max, r_max] when the flux
/// depends on u; a single r node otherwise).
cell::FluxTable upscale(const config::ProblemConfig& cfg, const coeff::Coefficient& c, double xi_max,
                        double r_max);

struct MacroResult {
  cell::FluxTable table;
  solver::SolveReport report;
  /// Tables built until the grid covered the solution with the margin.
  int table_rounds = 0;
};

/// Solves the homogenized problem, resizing the flux table until it covers
/// the solution range with the configured margin.
MacroResult solve_macro(const config::ProblemConfig& cfg, const coeff::Coefficient& c);

/// Cells per axis of the direct-mode mesh at this eps.
int fine_cells(const config::ProblemConfig& cfg, double eps);
solver::SolveReport solve_eps(const config::ProblemConfig& cfg, const coeff::Coefficient& c, double eps);

struct StudyRow {
  double eps = 0.0;
  int fine_n = 0;
  double err_u = 0.0;           // |u_eps - u0|_Phi
  double err_grad_recon = 0.0;  // |Du_eps - G_eps|_Phi
  double err_grad_naive = 0.0;  // |Du_eps - Du0|_Phi
  double err_field_recon = 0.0; // |u_eps - (u0 + eps u1 + eps^2 u2)|_Phi
  double sigma_gap = 0.0;       // max over the dictionary of the pairing gap
  double mean_gap = 0.0;        // |int u_eps - int u0|
  int newton_iters = 0;
  double residual = 0.0;
};

struct TrendCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ConvergenceTable {
  std::string problem;
  std::string origin;
  std::uint64_t seed = 0;
  coeff::HypothesisReport hypotheses;
  std::vector<StudyRow> rows;
  std::vector<TrendCheck> checks;
  int macro_n = 0;
  int macro_newton = 0;
  double macro_residual = 0.0;
  int table_rounds = 0;
  std::size_t table_nodes = 0;
  bool table_clamped = false;
  std::size_t corrector_solves = 0;
  /// The flux ignores y and z, so u_eps does not depend on eps and the
  /// trend checks are replaced by eps-invariance checks.
  bool scale_free = false;

  bool all_pass() const noexcept;
};

/// Values at or below this floor count as converged in trend checks.
inline constexpr double kTrendFloor = 1e-6;
/// Relative discretization error accepted for scale-free coefficients.
inline constexpr double kScaleFreeTolerance = 1e-3;

/// True when the flux shows no dependence on y or z on a sample grid.
bool scale_free(const coeff::Coefficient& c);

/// Errors carry the failing stage in their message.
ConvergenceTable run_convergence_study(const config::ProblemConfig& cfg);

/// Writes convergence.csv, study.gp and report.txt; the output depends only
/// on the table.
void emit_report(const ConvergenceTable& table, const std::filesystem::path& dir);

}  // namespace reiterhom::harness

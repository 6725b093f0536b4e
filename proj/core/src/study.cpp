#include "reiterhom/study.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include <fmt/format.h>

#include "reiterhom/error.hpp"
#include "reiterhom/norms.hpp"
#include "reiterhom/parallel.hpp"

namespace reiterhom::harness {

namespace {

using fields::Field;
using fields::FieldKind;
using fields::Mesh;
using fields::Point;

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SolverError& e) {
    throw SolverError(e.code(), fmt::format("stage '{}': {}", name, e.message()), e.residual_history());
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("stage '{}': {}", name, e.message()));
  }
}

Mesh fine_mesh(const config::ProblemConfig& cfg, int n) {
  return cfg.dim == 1 ? Mesh::interval(cfg.lower[0], cfg.upper[0], n) : Mesh::box(cfg.lower, cfg.upper, n);
}

// Dictionary pairings of the limit gradient: int M_y M_z[(Du0 + D_y pi1 +
// D_z pi2) w v] dx per term and component, from the tabulated correctors.
std::vector<double> limit_pairings(const solver::CorrectorSet& cs, const coeff::Coefficient& c) {
  const int d = cs.dim;
  const Mesh& xm = cs.pi2.x_mesh;
  const std::size_t ny = cs.pi2.y.size(), nz = cs.pi2.z.size();
  std::vector<double> out;
  for (const auto& term : c.dictionary) {
    std::vector<double> wy(ny), vz(nz);
    for (std::size_t j = 0; j < ny; ++j) {
      const auto y = cs.pi2.y.node(j);
      wy[j] = term.y(std::span<const double>(y.data(), d));
    }
    for (std::size_t k = 0; k < nz; ++k) {
      const auto z = cs.pi2.z.node(k);
      vz[k] = term.z(std::span<const double>(z.data(), d));
    }
    double mw = 0.0, mv = 0.0;
    for (double v : wy) mw += v;
    for (double v : vz) mv += v;
    mw /= static_cast<double>(ny);
    mv /= static_cast<double>(nz);
    for (int a = 0; a < d; ++a) {
      double total = 0.0;
      for (std::size_t i = 0; i < xm.node_count(); ++i) {
        double m = cs.du0.interpolate(xm.node(i), a) * mw * mv;
        for (std::size_t j = 0; j < ny; ++j) {
          double inner = cs.grad_pi1[a].at(i, j, 0) * mv;
          for (std::size_t k = 0; k < nz; ++k) inner += cs.grad_pi2[a].at(i, j, k) * vz[k] / static_cast<double>(nz);
          m += inner * wy[j] / static_cast<double>(ny);
        }
        total += xm.weight(i) * m;
      }
      out.push_back(term.coeff * total);
    }
  }
  return out;
}

std::vector<double> eps_pairings(const Field& du, double eps, const coeff::Coefficient& c) {
  const int d = du.mesh().dim();
  const Mesh& m = du.mesh();
  std::vector<double> out;
  for (const auto& term : c.dictionary) {
    std::vector<double> sums(static_cast<std::size_t>(d), 0.0);
    for (std::size_t p = 0; p < m.node_count(); ++p) {
      const Point x = m.node(p);
      const Point y{x[0] / eps, x[1] / eps};
      const Point z{x[0] / (eps * eps), x[1] / (eps * eps)};
      const double t = term.y(std::span<const double>(y.data(), d)) * term.z(std::span<const double>(z.data(), d));
      for (int a = 0; a < d; ++a) sums[a] += m.weight(p) * du.value(p, a) * t;
    }
    for (double s : sums) out.push_back(term.coeff * s);
  }
  return out;
}

// Strictly decreasing, with values under the floor treated as converged.
bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= kTrendFloor) continue;
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.4e}", i ? " " : "", v[i]);
  return s;
}

}  // namespace

bool scale_free(const coeff::Coefficient& c) {
  const int d = c.dim;
  const int n = d == 1 ? 16 : 6;
  const std::size_t count = d == 1 ? n : n * n;
  auto cell_point = [&](std::size_t k, double length) {
    Point p{0.0, 0.0};
    p[0] = length * (static_cast<double>(k % n) + 0.37) / n;
    if (d == 2) p[1] = length * (static_cast<double>(k / n) + 0.61) / n;
    return p;
  };
  for (double zeta : {0.0, 0.7, -2.3}) {
    for (Point lambda : {Point{1.0, 0.3}, Point{-0.4, 2.0}}) {
      const auto flux = [&](const Point& y, const Point& z) {
        return c(std::span<const double>(y.data(), d), std::span<const double>(z.data(), d), zeta,
                 std::span<const double>(lambda.data(), d));
      };
      const Point origin{0.0, 0.0};
      const coeff::Vec ref = flux(origin, origin);
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
          const coeff::Vec a = flux(cell_point(i, c.cell_length_y), cell_point(j, c.cell_length_z));
          for (int k = 0; k < d; ++k) {
            if (std::abs(a[k] - ref[k]) > 1e-12 * (1.0 + std::abs(ref[k]))) return false;
          }
        }
      }
    }
  }
  return true;
}

Mesh cell_mesh_y(const coeff::Coefficient& c, int n) { return Mesh::unit_cell(c.dim, n, c.cell_length_y); }
Mesh cell_mesh_z(const coeff::Coefficient& c, int n) { return Mesh::unit_cell(c.dim, n, c.cell_length_z); }

cell::FluxTable upscale(const config::ProblemConfig& cfg, const coeff::Coefficient& c, double xi_max,
                        double r_max) {
  const config::SolverSettings& s = cfg.solver;
  const std::vector<double> xi = cell::linspace(-xi_max, xi_max, s.table_points);
  std::vector<double> r = c.zeta_dependent ? cell::linspace(-r_max, r_max, s.table_points_r) : std::vector<double>{0.0};
  cell::TableOptions opt;
  opt.jobs = s.jobs;
  cell::FluxTable table = cell::tabulate_flux(c, std::move(r), {xi, c.dim == 2 ? xi : std::vector<double>{0.0}},
                                              cell_mesh_y(c, s.y_cells()), cell_mesh_z(c, s.cell_n), opt);
  table.metadata["config"] = fmt::format("\"{}\"", cfg.origin);
  return table;
}

MacroResult solve_macro(const config::ProblemConfig& cfg, const coeff::Coefficient& c) {
  const double margin = 1.0 + cfg.solver.table_margin;
  double xi_max = 1.0, r_max = 1.0;
  std::optional<MacroResult> last;
  for (int round = 1; round <= 5; ++round) {
    cell::FluxTable table = upscale(cfg, c, xi_max, r_max);
    solver::EllipticProblem p;
    p.mesh = cfg.macro_mesh();
    p.mode = solver::FluxMode::effective;
    p.coefficient = &c;
    p.table = &table;
    p.f = cfg.rhs();
    solver::SolveReport report = solver::solve(p, cfg.solver.tol);
    const solver::SolutionRange range = solver::solution_range(report.solution);
    const double need_xi = std::max(range.gradient_max * margin, 1e-3);
    const double need_r = std::max(range.u_max * margin, 1e-3);
    const bool covered = !report.clamped && xi_max >= need_xi && (!c.zeta_dependent || r_max >= need_r);
    // The first round only probes the range; later rounds fit the grid to it.
    const bool tight = xi_max <= 2.0 * need_xi && (!c.zeta_dependent || r_max <= 2.0 * need_r);
    last.emplace(MacroResult{std::move(table), std::move(report), round});
    if (covered && tight) break;
    // Slack of 10% keeps the refit from missing the range by round-off.
    xi_max = covered ? 1.1 * need_xi : std::max(1.1 * need_xi, 2.0 * xi_max);
    r_max = covered ? 1.1 * need_r : std::max(1.1 * need_r, 2.0 * r_max);
  }
  return std::move(*last);
}

int fine_cells(const config::ProblemConfig& cfg, double eps) {
  double length = cfg.upper[0] - cfg.lower[0];
  if (cfg.dim == 2) length = std::max(length, cfg.upper[1] - cfg.lower[1]);
  const int n = static_cast<int>(std::ceil(cfg.solver.fine_factor * length / (eps * eps) - 1e-9));
  if (cfg.dim == 2) return std::min(n, Mesh::kMaxCells2d);
  return n;
}

solver::SolveReport solve_eps(const config::ProblemConfig& cfg, const coeff::Coefficient& c, double eps) {
  solver::EllipticProblem p;
  p.mesh = fine_mesh(cfg, fine_cells(cfg, eps));
  p.mode = solver::FluxMode::direct;
  p.coefficient = &c;
  p.eps = eps;
  p.f = cfg.rhs();
  return solver::solve(p, cfg.solver.tol);
}

bool ConvergenceTable::all_pass() const noexcept {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

ConvergenceTable run_convergence_study(const config::ProblemConfig& cfg) {
  stage("config", [&] {
    cfg.check();
    return 0;
  });
  const coeff::Coefficient c = stage("config", [&] { return cfg.build_coefficient(); });
  const config::SolverSettings& s = cfg.solver;

  ConvergenceTable out;
  out.problem = c.name;
  out.origin = cfg.origin;
  out.seed = s.seed;
  out.hypotheses = stage("validate", [&] { return coeff::validate(c, s.samples, s.seed); });

  MacroResult macro = stage("macro", [&] { return solve_macro(cfg, c); });
  out.macro_n = s.macro_n;
  out.macro_newton = macro.report.newton_iters;
  out.macro_residual = macro.report.residual;
  out.table_rounds = macro.table_rounds;
  out.table_nodes = macro.table.values().size();
  out.table_clamped = macro.report.clamped;
  const Field& u0 = macro.report.solution;
  const double u0_integral = fields::integrate(u0);

  const solver::CorrectorSet correctors = stage("correctors", [&] {
    solver::CorrectorOptions opt;
    opt.recon_n = s.recon_n;
    opt.jobs = s.jobs;
    return solver::compute_correctors(u0, c, cell_mesh_y(c, s.recon_y_cells()), cell_mesh_z(c, s.recon_cell_n), opt);
  });
  out.corrector_solves = correctors.cell_solves;
  const std::vector<double> limit = limit_pairings(correctors, c);

  out.rows.resize(s.eps_list.size());
  stage("eps", [&] {
    parallel_for(s.eps_list.size(), s.jobs, [&](std::size_t i) {
      const double eps = s.eps_list[i];
      const solver::SolveReport rep = solve_eps(cfg, c, eps);
      const Field& ue = rep.solution;
      const Mesh& fine = ue.mesh();
      const Field due = fields::gradient(ue);
      const solver::Reconstruction rec = solver::corrector_reconstruct(correctors, eps, fine);

      std::vector<double> naive(fine.node_count() * static_cast<std::size_t>(c.dim));
      for (std::size_t p = 0; p < fine.node_count(); ++p) {
        for (int a = 0; a < c.dim; ++a) naive[p * c.dim + a] = correctors.du0.interpolate(fine.node(p), a);
      }
      const Field du0(fine, FieldKind::vector, std::move(naive));
      const Field u0_fine = fields::resample(u0, fine);

      StudyRow& row = out.rows[i];
      row.eps = eps;
      row.fine_n = fine.cells_per_axis();
      row.err_u = fields::luxemburg_norm(fields::combine(1.0, ue, -1.0, u0_fine), c.phi);
      row.err_grad_recon = fields::luxemburg_norm(fields::combine(1.0, due, -1.0, rec.gradient), c.phi);
      row.err_grad_naive = fields::luxemburg_norm(fields::combine(1.0, due, -1.0, du0), c.phi);
      row.err_field_recon = fields::luxemburg_norm(fields::combine(1.0, ue, -1.0, rec.field), c.phi);
      const std::vector<double> pair = eps_pairings(due, eps, c);
      for (std::size_t k = 0; k < pair.size(); ++k) row.sigma_gap = std::max(row.sigma_gap, std::abs(pair[k] - limit[k]));
      row.mean_gap = std::abs(fields::integrate(ue) - u0_integral);
      row.newton_iters = rep.newton_iters;
      row.residual = rep.residual;
    });
    return 0;
  });

  std::vector<double> err_u, recon, naive, field, sigma, mean;
  for (const auto& r : out.rows) {
    err_u.push_back(r.err_u);
    recon.push_back(r.err_grad_recon);
    naive.push_back(r.err_grad_naive);
    field.push_back(r.err_field_recon);
    sigma.push_back(r.sigma_gap);
    mean.push_back(r.mean_gap);
  }
  auto last_below_first = [](const std::vector<double>& v) {
    return v.back() <= kTrendFloor || v.back() < v.front();
  };
  out.checks.push_back({"hypotheses", out.hypotheses.all_pass(), "H1-H6 sampled"});
  out.checks.push_back({"table_covers_macro", !out.table_clamped, fmt::format("{} rounds", out.table_rounds)});
  out.scale_free = scale_free(c);
  if (out.scale_free) {
    // Without oscillation u_eps = u0 for every eps; what remains is the
    // discretization error, which has no trend in eps.
    const double u_scale = fields::luxemburg_norm(u0, c.phi);
    const double g_scale = fields::luxemburg_norm(correctors.du0, c.phi);
    const double u_worst = *std::max_element(err_u.begin(), err_u.end());
    const double g_worst = *std::max_element(naive.begin(), naive.end());
    const double m_worst = *std::max_element(mean.begin(), mean.end());
    double corrector = 0.0;
    for (const auto* t : {&correctors.pi1, &correctors.pi2}) {
      for (double v : t->values) corrector = std::max(corrector, std::abs(v));
    }
    out.checks.push_back({"eps_invariant_u", u_worst <= kScaleFreeTolerance * u_scale,
                          fmt::format("max {:.4e} vs |u0| {:.4e}", u_worst, u_scale)});
    out.checks.push_back({"eps_invariant_grad", g_worst <= kScaleFreeTolerance * g_scale,
                          fmt::format("max {:.4e} vs |Du0| {:.4e}", g_worst, g_scale)});
    out.checks.push_back({"correctors_vanish", corrector <= 1e-9 * (1.0 + g_scale),
                          fmt::format("max |pi| = {:.3e}", corrector)});
    out.checks.push_back({"mean_gap_floor", m_worst <= kScaleFreeTolerance * (std::abs(u0_integral) + kTrendFloor),
                          fmt::format("max {:.4e} vs |int u0| {:.4e}", m_worst, std::abs(u0_integral))});
    out.checks.push_back({"sigma_gap_trend", last_below_first(sigma), list(sigma)});
    return out;
  }
  out.checks.push_back({"err_u_decreasing", decreasing(err_u), list(err_u)});
  out.checks.push_back({"err_u_final_quarter",
                        err_u.back() <= kTrendFloor || (err_u.size() > 1 && err_u.back() <= 0.25 * err_u.front()),
                        fmt::format("last/first = {:.4g}", err_u.back() / err_u.front())});
  bool beats = true;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    beats = beats && (recon[i] < naive[i] || (recon[i] <= kTrendFloor && naive[i] <= kTrendFloor));
  }
  out.checks.push_back({"recon_beats_naive", beats, fmt::format("recon {} | naive {}", list(recon), list(naive))});
  out.checks.push_back({"field_recon_decreasing", decreasing(field), list(field)});
  out.checks.push_back({"sigma_gap_trend", last_below_first(sigma), list(sigma)});
  out.checks.push_back({"mean_gap_trend", last_below_first(mean), list(mean)});
  return out;
}

void emit_report(const ConvergenceTable& t, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(Errc::io, fmt::format("cannot write '{}'", (dir / name).string()));
    return f;
  };
  auto close = [&](std::ofstream& f, const char* name) {
    f.close();
    if (!f) throw Error(Errc::io, fmt::format("write to '{}' failed", (dir / name).string()));
  };

  {
    std::ofstream f = open("convergence.csv");
    f << "eps,fine_n,err_u,err_grad_recon,err_grad_naive,err_field_recon,sigma_gap,mean_gap,newton_iters,residual\n";
    for (const auto& r : t.rows) {
      f << fmt::format("{:.17g},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{},{:.3e}\n", r.eps, r.fine_n,
                       r.err_u, r.err_grad_recon, r.err_grad_naive, r.err_field_recon, r.sigma_gap, r.mean_gap,
                       r.newton_iters, r.residual);
    }
    close(f, "convergence.csv");
  }
  {
    std::ofstream f = open("study.gp");
    f << fmt::format("# reiterhom convergence study: {}\n", t.problem);
    f << "set datafile separator ','\n"
         "set logscale xy\n"
         "set key left top\n"
         "set xlabel 'eps'\n"
         "set ylabel 'Luxemburg norm'\n"
         "set terminal pngcairo size 900,600\n"
         "set output 'convergence.png'\n"
         "plot 'convergence.csv' skip 1 using 1:3 with linespoints title '|u_eps - u_0|', \\\n"
         "     '' skip 1 using 1:4 with linespoints title '|Du_eps - G_eps|', \\\n"
         "     '' skip 1 using 1:5 with linespoints title '|Du_eps - Du_0|', \\\n"
         "     '' skip 1 using 1:7 with linespoints title 'sigma gap'\n";
    close(f, "study.gp");
  }
  {
    std::ofstream f = open("report.txt");
    f << fmt::format("problem = {}\nconfig = {}\nseed = {}\n\n", t.problem, t.origin, t.seed);
    f << fmt::format("[hypotheses] samples = {}\n", t.hypotheses.samples);
    for (const auto& h : t.hypotheses.results) {
      f << fmt::format("{:<9} {} margin = {:.6g}  {}\n", h.name, h.pass ? "pass" : "FAIL", h.margin, h.detail);
    }
    f << fmt::format("\n[macro]\nmacro_n = {}\nnewton_iters = {}\nresidual = {:.3e}\n", t.macro_n, t.macro_newton,
                     t.macro_residual);
    f << fmt::format("table_rounds = {}\ntable_nodes = {}\ntable_clamped = {}\ncorrector_solves = {}\n",
                     t.table_rounds, t.table_nodes, t.table_clamped ? 1 : 0, t.corrector_solves);
    f << fmt::format("scale_free = {}\n", t.scale_free ? 1 : 0);
    f << "\n[checks]\n";
    for (const auto& c : t.checks) f << fmt::format("{:<24} {}  {}\n", c.name, c.pass ? "pass" : "FAIL", c.detail);
    f << fmt::format("\nresult = {}\n", t.all_pass() ? "PASS" : "FAIL");
    close(f, "report.txt");
  }
}

}  // namespace reiterhom::harness

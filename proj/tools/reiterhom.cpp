// reiterhom command line: validate, sigma, cell, upscale, macro, eps and
// converge subcommands over a problem config file.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "reiterhom/cell.hpp"
#include "reiterhom/config.hpp"
#include "reiterhom/error.hpp"
#include "reiterhom/flux_table.hpp"
#include "reiterhom/meanvalue.hpp"
#include "reiterhom/multiscale.hpp"
#include "reiterhom/solver.hpp"
#include "reiterhom/study.hpp"

namespace fs = std::filesystem;
using namespace reiterhom;

namespace {

// Scalars given on the command line override the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
  std::optional<int> macro_n, cell_n, cell_n_y, fine_factor, recon_n;
  std::string eps;
  std::string out;
};

config::ProblemConfig load(const std::string& path, const Overrides& o, bool eps_is_list = true) {
  config::ProblemConfig cfg = config::load(path);
  auto& s = cfg.solver;
  if (o.seed) s.seed = *o.seed;
  if (o.jobs) s.jobs = *o.jobs;
  if (o.samples) s.samples = *o.samples;
  if (o.tol) s.tol = *o.tol;
  if (o.macro_n) s.macro_n = *o.macro_n;
  if (o.cell_n) s.cell_n = *o.cell_n;
  if (o.cell_n_y) s.cell_n_y = *o.cell_n_y;
  if (o.fine_factor) s.fine_factor = *o.fine_factor;
  if (o.recon_n) s.recon_n = *o.recon_n;
  if (eps_is_list && !o.eps.empty()) s.eps_list = config::parse_list(o.eps);
  cfg.check();
  return cfg;
}

fs::path out_dir(const Overrides& o) {
  const fs::path dir = o.out.empty() ? fs::path("out") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

void write_field(const fs::path& file, const fields::Field& u) {
  std::ofstream f(file);
  if (!f) throw Error(Errc::io, fmt::format("cannot write '{}'", file.string()));
  fields::write_csv(f, u);
}

void print_solve(const solver::SolveReport& r, const std::string& title) {
  fmt::print("[{}]\nresidual = {:.6e}\nnewton_iters = {}\npicard_steps = {}\nenergy = {:.10e}\n", title, r.residual,
             r.newton_iters, r.picard_steps, r.energy);
  fmt::print("f_norm_complementary = {:.10e}\ngradient_norm = {:.10e}\nmax_abs_u = {:.10e}\nclamped = {}\n", r.f_norm,
             r.gradient_norm, solver::solution_range(r.solution).u_max, r.clamped ? 1 : 0);
}

int cmd_validate(const std::string& path, const Overrides& o) {
  const config::ProblemConfig cfg = load(path, o);
  const coeff::Coefficient c = cfg.build_coefficient();
  const auto grid = nfunc::default_grid();
  const nfunc::GrowthReport g = nfunc::growth_report(c.phi, grid);
  fmt::print("[growth]\nnfunction = {}\ndelta2 = {}\ndelta2_t0 = {:.6g}\ndelta2_k = {:.6g}\n", nfunc::to_string(c.phi.kind()),
             g.delta2 ? 1 : 0, g.delta2_t0, g.delta2_k);
  fmt::print("delta_prime = {}\ndelta_prime_t0 = {:.6g}\ndelta_prime_beta = {:.6g}\n", g.delta_prime ? 1 : 0,
             g.delta_prime_t0, g.delta_prime_beta);
  fmt::print("simonenko_lo = {:.10g}\nsimonenko_hi = {:.10g}\n\n", g.simonenko_lo, g.simonenko_hi);
  fmt::print("delta2,delta2_t0,delta2_k,delta_prime,delta_prime_t0,delta_prime_beta,simonenko_lo,simonenko_hi\n");
  fmt::print("{},{:.6g},{:.6g},{},{:.6g},{:.6g},{:.10g},{:.10g}\n\n", g.delta2 ? 1 : 0, g.delta2_t0, g.delta2_k,
             g.delta_prime ? 1 : 0, g.delta_prime_t0, g.delta_prime_beta, g.simonenko_lo, g.simonenko_hi);
  const coeff::HypothesisReport rep = coeff::validate(c, cfg.solver.samples, cfg.solver.seed);
  fmt::print("[hypotheses]\nproblem = {}\nsamples = {}\nseed = {}\n", rep.problem, rep.samples, rep.seed);
  for (const auto& h : rep.results) {
    fmt::print("{:<9} {} margin = {:.6g}  {}\n", h.name, h.pass ? "pass" : "FAIL", h.margin, h.detail);
    if (!h.witness.empty()) {
      std::string w;
      for (double v : h.witness) w += fmt::format(" {:.6g}", v);
      fmt::print("          witness (y, z, zeta, lambda, zeta', lambda'):{}\n", w);
    }
  }
  fmt::print("result = {}\n", rep.all_pass() ? "PASS" : "FAIL");
  return rep.all_pass() ? 0 : 1;
}

int cmd_sigma(const std::string& path, const Overrides& o) {
  const config::ProblemConfig cfg = load(path, o);
  const coeff::Coefficient c = cfg.build_coefficient();
  if (c.dictionary.empty()) throw Error(Errc::config, "problem has no test-function dictionary");
  const auto& term = c.dictionary.front();
  const fields::MultiscaleField u0 = fields::MultiscaleField::separable(c.dim, std::nullopt, term.y, term.z, term.coeff);
  const std::vector<double>& eps = cfg.solver.eps_list;
  const double smallest = eps.back();
  const int n = static_cast<int>(std::ceil(cfg.solver.fine_factor * (cfg.upper[0] - cfg.lower[0]) / (smallest * smallest)));
  const fields::Mesh mesh = cfg.dim == 1 ? fields::Mesh::interval(cfg.lower[0], cfg.upper[0], n)
                                         : fields::Mesh::box(cfg.lower, cfg.upper, std::min(n, fields::Mesh::kMaxCells2d));
  const meanvalue::SigmaTestReport rep = meanvalue::sigma_test(u0, u0, mesh, eps);
  fmt::print("eps,lhs,rhs,gap\n");
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    fmt::print("{:.17g},{:.17g},{:.17g},{:.6e}\n", rep.eps[i], rep.lhs[i], rep.rhs, rep.gap[i]);
  }
  return rep.gap_decreasing(1e-12) ? 0 : 1;
}

int cmd_cell(const std::string& path, const Overrides& o, const std::string& y_text, double r,
             const std::string& xi_text, bool nested) {
  const config::ProblemConfig cfg = load(path, o);
  const coeff::Coefficient c = cfg.build_coefficient();
  std::vector<double> y = config::parse_list(y_text);
  const std::vector<double> xi_list = config::parse_list(xi_text);
  if (static_cast<int>(y.size()) != c.dim || static_cast<int>(xi_list.size()) != c.dim) {
    throw Error(Errc::config, fmt::format("--y and --xi need {} components", c.dim));
  }
  const cell::Vec xi{xi_list[0], c.dim > 1 ? xi_list[1] : 0.0};
  const fields::Mesh mz = harness::cell_mesh_z(c, cfg.solver.cell_n);
  const cell::CellSolution s = cell::solve_cell_z(c, y, r, xi, mz);
  fmt::print("[cell_z]\nh = {:.12g}", s.flux_sample[0]);
  if (c.dim > 1) fmt::print(", {:.12g}", s.flux_sample[1]);
  fmt::print("\nresidual = {:.6e}\nnewton_iters = {}\n", s.residual, s.newton_iterations);
  if (nested) {
    const fields::Mesh my = harness::cell_mesh_y(c, cfg.solver.y_cells());
    const cell::NestedCellSolver solver(c, my, mz);
    const cell::CellSolution q = solver.solve_y(r, xi);
    fmt::print("[cell_y]\nq = {:.12g}", q.flux_sample[0]);
    if (c.dim > 1) fmt::print(", {:.12g}", q.flux_sample[1]);
    fmt::print("\nresidual = {:.6e}\nnewton_iters = {}\nz_solves = {}\n", q.residual, q.newton_iterations,
               solver.cache_misses());
  }
  return 0;
}

int cmd_upscale(const std::string& path, const Overrides& o, std::optional<double> xi_max,
                std::optional<double> r_max) {
  const config::ProblemConfig cfg = load(path, o);
  const coeff::Coefficient c = cfg.build_coefficient();
  const cell::FluxTable table = xi_max ? harness::upscale(cfg, c, *xi_max, r_max.value_or(*xi_max))
                                       : harness::solve_macro(cfg, c).table;
  const fs::path file = out_dir(o) / "flux_table.csv";
  std::ofstream f(file);
  if (!f) throw Error(Errc::io, fmt::format("cannot write '{}'", file.string()));
  cell::write_csv(f, table);
  fmt::print("wrote {} ({} nodes)\n", file.string(), table.values().size());
  return 0;
}

int cmd_macro(const std::string& path, const Overrides& o) {
  const config::ProblemConfig cfg = load(path, o);
  const coeff::Coefficient c = cfg.build_coefficient();
  const harness::MacroResult m = harness::solve_macro(cfg, c);
  const fs::path dir = out_dir(o);
  write_field(dir / "u0.csv", m.report.solution);
  std::ofstream f(dir / "flux_table.csv");
  cell::write_csv(f, m.table);
  print_solve(m.report, "macro");
  fmt::print("table_rounds = {}\ntable_nodes = {}\nsolution = {}\n", m.table_rounds, m.table.values().size(),
             (dir / "u0.csv").string());
  return m.report.clamped ? 1 : 0;
}

int cmd_eps(const std::string& path, const Overrides& o) {
  const config::ProblemConfig cfg = load(path, o, false);
  const coeff::Coefficient c = cfg.build_coefficient();
  if (o.eps.empty()) throw Error(Errc::config, "eps needs --eps <value>");
  const std::vector<double> v = config::parse_list(o.eps);
  if (v.size() != 1) throw Error(Errc::config, "eps takes a single value");
  const solver::SolveReport r = harness::solve_eps(cfg, c, v[0]);
  const fs::path file = out_dir(o) / fmt::format("u_eps_{:.6g}.csv", v[0]);
  write_field(file, r.solution);
  print_solve(r, "eps");
  fmt::print("eps = {:.17g}\nfine_n = {}\nsolution = {}\n", v[0], r.solution.mesh().cells_per_axis(), file.string());
  return 0;
}

int cmd_converge(const std::string& path, const Overrides& o) {
  const config::ProblemConfig cfg = load(path, o);
  const harness::ConvergenceTable t = harness::run_convergence_study(cfg);
  const fs::path dir = out_dir(o);
  harness::emit_report(t, dir);
  std::ifstream report(dir / "report.txt");
  std::cout << report.rdbuf();
  return t.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reiterated homogenization engine"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  std::uint64_t seed = 0;
  int jobs = 0;
  app.add_option("--seed", seed, "Sampling seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Output directory (default ./out)");

  std::string cfg_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("cfg", cfg_path, "Problem config file")->required();
    sub->add_option("--samples", o.samples, "Hypothesis samples");
    sub->add_option("--tol", o.tol, "Nonlinear residual tolerance");
    sub->add_option("--macro-n", o.macro_n, "Macroscopic cells per axis");
    sub->add_option("--cell-n", o.cell_n, "Cells per axis of the Z cell");
    sub->add_option("--cell-n-y", o.cell_n_y, "Cells per axis of the Y cell");
    sub->add_option("--fine-factor", o.fine_factor, "Direct-mode cells per eps^2");
    sub->add_option("--recon-n", o.recon_n, "Corrector reconstruction x-cells");
  };

  auto* validate = app.add_subcommand("validate", "Check the structural hypotheses of a problem");
  add_common(validate);
  auto* sigma = app.add_subcommand("sigma", "Reiterated two-scale pairing test");
  sigma->add_option("cfg", cfg_path, "Problem config file");
  sigma->add_option("--problem", cfg_path, "Problem config file");
  sigma->add_option("--eps", o.eps, "Decreasing eps list, e.g. 0.25,0.125");
  sigma->add_option("--fine-factor", o.fine_factor, "Cells per eps^2");
  auto* cellcmd = app.add_subcommand("cell", "Solve the cell problem at one point");
  add_common(cellcmd);
  std::string y_text = "0", xi_text = "1";
  double r = 0.0;
  bool nested = false;
  cellcmd->add_option("--y", y_text, "Slow cell point (comma separated)");
  cellcmd->add_option("--r", r, "Value of u");
  cellcmd->add_option("--xi", xi_text, "Macroscopic gradient (comma separated)");
  cellcmd->add_flag("--nested", nested, "Also solve the Y problem for q");
  auto* upscale = app.add_subcommand("upscale", "Tabulate the effective flux");
  add_common(upscale);
  std::optional<double> xi_max, r_max;
  upscale->add_option("--xi-max", xi_max, "Table half-width in xi (default: fit to the macro solution)");
  upscale->add_option("--r-max", r_max, "Table half-width in r");
  auto* macro = app.add_subcommand("macro", "Solve the homogenized problem");
  add_common(macro);
  auto* eps = app.add_subcommand("eps", "Solve the oscillating problem at one eps");
  add_common(eps);
  eps->add_option("--eps", o.eps, "Scale eps")->required();
  auto* converge = app.add_subcommand("converge", "Run the convergence study");
  add_common(converge);
  converge->add_option("--eps", o.eps, "Decreasing eps list");

  CLI11_PARSE(app, argc, argv);
  if (app.count("--seed")) o.seed = seed;
  if (app.count("--jobs")) o.jobs = jobs;

  try {
    if (*validate) return cmd_validate(cfg_path, o);
    if (*sigma) {
      if (cfg_path.empty()) throw Error(Errc::config, "sigma needs a config (positional or --problem)");
      return cmd_sigma(cfg_path, o);
    }
    if (*cellcmd) return cmd_cell(cfg_path, o, y_text, r, xi_text, nested);
    if (*upscale) return cmd_upscale(cfg_path, o, xi_max, r_max);
    if (*macro) return cmd_macro(cfg_path, o);
    if (*eps) return cmd_eps(cfg_path, o);
    if (*converge) return cmd_converge(cfg_path, o);
  } catch (const Error& e) {
    std::cerr << fmt::format("reiterhom: {}: {}\n", to_string(e.code()), e.message());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("reiterhom: {}\n", e.what());
    return 2;
  }
  return 2;
}

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/study.hpp"

using namespace reiterhom;
namespace fs = std::filesystem;

namespace {

config::ProblemConfig const1d() {
  std::istringstream in(R"(
[coefficient]
name = const1d
c0 = 2
[domain]
f = 1
[solver]
macro_n = 256
cell_n = 16
eps = 1/4, 1/8, 1/16
recon_n = 8
recon_cell_n = 8
samples = 2000
)");
  return config::parse(in, "const1d-test");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("reiterhom_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Study, ConstantCoefficientHasNoHomogenizationError) {
  const auto table = harness::run_convergence_study(const1d());
  ASSERT_EQ(table.rows.size(), 3u);
  for (const auto& r : table.rows) {
    EXPECT_LE(r.err_u, 1e-6);
    EXPECT_LE(r.err_grad_recon, 1e-6);
    EXPECT_LE(r.err_grad_naive, 1e-6);
    EXPECT_LE(r.err_field_recon, 1e-6);
    EXPECT_LE(r.mean_gap, 1e-6);
  }
  EXPECT_TRUE(table.scale_free);
  EXPECT_TRUE(table.all_pass());
}

TEST(Study, FineMeshesSatisfyResolutionRule) {
  const auto cfg = const1d();
  for (double eps : cfg.solver.eps_list) EXPECT_LE(1.0 / harness::fine_cells(cfg, eps), eps * eps / 4.0);
}

TEST(Study, EmptyEpsListIsConfigError) {
  auto cfg = const1d();
  cfg.solver.eps_list.clear();
  try {
    harness::run_convergence_study(cfg);
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config);
    EXPECT_NE(std::string(e.what()).find("stage 'config'"), std::string::npos);
  }
}

TEST(Study, ScaleFreeDetection) {
  EXPECT_TRUE(harness::scale_free(coeff::builtin_problem("deg1d")));
  EXPECT_TRUE(harness::scale_free(coeff::builtin_problem("const1d")));
  EXPECT_FALSE(harness::scale_free(coeff::builtin_problem("lin1d")));
  EXPECT_FALSE(harness::scale_free(coeff::builtin_problem("ap1d")));
  EXPECT_FALSE(harness::scale_free(coeff::builtin_problem("plap2d")));
}

TEST(Report, FilesHeadersAndRowCount) {
  const auto table = harness::run_convergence_study(const1d());
  const fs::path dir = scratch("files");
  harness::emit_report(table, dir);
  for (const char* f : {"convergence.csv", "study.gp", "report.txt"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::istringstream csv(slurp(dir / "convergence.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "eps,fine_n,err_u,err_grad_recon,err_grad_naive,err_field_recon,sigma_gap,mean_gap,newton_iters,residual");
  std::size_t rows = 1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, table.rows.size() + 1);
  EXPECT_NE(slurp(dir / "report.txt").find("result = PASS"), std::string::npos);
  EXPECT_NE(slurp(dir / "study.gp").find("convergence.csv"), std::string::npos);
}

TEST(Report, RerunIsByteIdentical) {
  const fs::path a = scratch("a"), b = scratch("b");
  harness::emit_report(harness::run_convergence_study(const1d()), a);
  harness::emit_report(harness::run_convergence_study(const1d()), b);
  for (const char* f : {"convergence.csv", "study.gp", "report.txt"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Report, UnwritableDirectoryIsIoError) {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "x";
  harness::ConvergenceTable table;
  try {
    harness::emit_report(table, blocker / "sub");
    FAIL() << "expected an I/O error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
  fs::remove(blocker);
}

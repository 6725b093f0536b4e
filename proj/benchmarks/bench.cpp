#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "reiterhom/cell.hpp"
#include "reiterhom/coeff.hpp"
#include "reiterhom/norms.hpp"
#include "reiterhom/solver.hpp"

using namespace reiterhom;
using fields::Mesh;

namespace {

// One pi_2 solve on the 2D cell Z; the inner kernel of every nested solve.
void BM_CellZ2d(benchmark::State& state) {
  const auto c = coeff::builtin_problem("plap2d", {{"p", 3.0}});
  const Mesh z = Mesh::unit_cell(2, static_cast<int>(state.range(0)));
  const double y[2] = {0.3, 0.7};
  cell::CellOptions opt;
  opt.linear = static_cast<fem::LinearSolverKind>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cell::solve_cell_z(c, y, 0.0, {1.0, -0.5}, z, opt).flux_sample);
  }
}
BENCHMARK(BM_CellZ2d)
    ->ArgsProduct({{16, 32, 64}, {static_cast<int>(fem::LinearSolverKind::iterative),
                                  static_cast<int>(fem::LinearSolverKind::spectral)}})
    ->Unit(benchmark::kMillisecond);

// Full q(r, xi) through the nested Y/Z solve with a fresh cache each time.
void BM_NestedCell2d(benchmark::State& state) {
  const auto c = coeff::builtin_problem("plap2d", {{"p", 3.0}});
  const Mesh y = Mesh::unit_cell(2, 4);
  const Mesh z = Mesh::unit_cell(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cell::solve_cell_y(c, 0.0, {1.0, -0.5}, y, z).flux_sample);
  }
}
BENCHMARK(BM_NestedCell2d)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CellY1d(benchmark::State& state) {
  const auto c = coeff::builtin_problem("lin1d");
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cell::solve_cell_y(c, 0.0, {1.0, 0.0}, Mesh::unit_cell(1, n), Mesh::unit_cell(1, n)).flux_sample);
  }
}
BENCHMARK(BM_CellY1d)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MacroSolve1d(benchmark::State& state) {
  const cell::FluxTable table = cell::FluxTable::from_function(
      1, {0.0}, {cell::linspace(-1.0, 1.0, 17), {0.0}},
      [](double, cell::Vec xi) { return cell::Vec{3.0 * xi[0] + xi[0] * xi[0] * xi[0], 0.0}; });
  solver::EllipticProblem p;
  p.mesh = Mesh::interval(0.0, 1.0, static_cast<int>(state.range(0)));
  p.mode = solver::FluxMode::effective;
  p.table = &table;
  p.f = [](fields::Point) { return 1.0; };
  for (auto _ : state) benchmark::DoNotOptimize(solver::solve(p, 1e-10).residual);
}
BENCHMARK(BM_MacroSolve1d)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Luxemburg(benchmark::State& state) {
  const Mesh m = Mesh::interval(0.0, 1.0, static_cast<int>(state.range(0)));
  const auto u = fields::Field::sample(m, [](fields::Point x) { return std::sin(7.0 * x[0]) + 0.3; });
  const nfunc::NFunction nf = state.range(1) == 0 ? nfunc::NFunction::power(3.0) : nfunc::NFunction::power_log(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fields::luxemburg_norm(u, nf));
}
BENCHMARK(BM_Luxemburg)->ArgsProduct({{1024, 16384}, {0, 1}})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

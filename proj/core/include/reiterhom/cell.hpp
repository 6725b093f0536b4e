#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "reiterhom/coeff.hpp"
#include "reiterhom/fem.hpp"
#include "reiterhom/field.hpp"

namespace reiterhom::cell {

using coeff::Mat;
using coeff::Vec;

struct CellSolution {
  fields::Field corrector;  // periodic, zero mean
  double residual = 0.0;
  Vec flux_sample{0.0, 0.0};
  /// Derivative of flux_sample in xi (from the sensitivity problem).
  Mat tangent{};
  int newton_iterations = 0;
};

struct CellOptions {
  /// Absolute residual tolerance; 0 picks 1e-10 for fluxes linear in the
  /// gradient and 1e-8 otherwise.
  double tol = 0.0;
  fem::LinearSolverKind linear = fem::LinearSolverKind::automatic;
  /// Linear solver for the inner problems on Z of solve_cell_y.
  fem::LinearSolverKind inner_linear = fem::LinearSolverKind::automatic;
  bool tangent = true;
  std::size_t cache_budget = 1'000'000;
};

/// Corrector pi_2 on the periodic mesh of Z for fixed (y, r, xi); the flux
/// sample is h(y, r, xi), the cell average of a(y, ., r, xi + D pi_2).
CellSolution solve_cell_z(const coeff::Coefficient& c, std::span<const double> y, double r, Vec xi,
                          const fields::Mesh& mesh_z, const CellOptions& options = {},
                          std::span<const double> warm_start = {});

Vec effective_h(const coeff::Coefficient& c, std::span<const double> y, double r, Vec xi,
                const fields::Mesh& mesh_z, const CellOptions& options = {});

/// Nested solver bound to one coefficient and one pair of cell meshes. Owns
/// the h-cache (keyed on Y quadrature point, r and xi quantized to 1e-8)
/// and per-point warm starts; safe to share between threads.
class NestedCellSolver {
 public:
  NestedCellSolver(coeff::Coefficient c, fields::Mesh mesh_y, fields::Mesh mesh_z, CellOptions options = {});

  const coeff::Coefficient& coefficient() const noexcept { return coeff_; }
  const fields::Mesh& mesh_y() const noexcept { return y_.mesh(); }
  const fields::Mesh& mesh_z() const noexcept { return z_.mesh(); }

  /// Corrector pi_1 on Y; the flux sample is q(r, xi).
  CellSolution solve_y(double r, Vec xi) const;
  /// pi_2 at an arbitrary y.
  CellSolution solve_z(std::span<const double> y, double r, Vec xi) const;

  std::size_t cache_size() const;
  std::uint64_t cache_hits() const noexcept { return hits_; }
  std::uint64_t cache_misses() const noexcept { return misses_; }

 private:
  struct Key {
    std::size_t qp;
    std::int64_t r, x0, x1;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct Entry {
    Vec h;
    Mat tangent;
    Vec g;  // gradient the entry was solved at
  };

  fem::QpFlux h_at(std::size_t qp, const fields::Point& y, double r, Vec g) const;

  coeff::Coefficient coeff_;
  fem::Discretization y_;
  fem::Discretization z_;
  CellOptions options_;
  double tol_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<Key, Entry, KeyHash> cache_;
  mutable std::mutex warm_mutex_;
  mutable std::unordered_map<std::size_t, std::vector<double>> warm_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

/// Convenience wrapper building a one-off NestedCellSolver.
CellSolution solve_cell_y(const coeff::Coefficient& c, double r, Vec xi, const fields::Mesh& mesh_y,
                          const fields::Mesh& mesh_z, const CellOptions& options = {});

}  // namespace reiterhom::cell

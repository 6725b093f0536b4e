#pragma once

#include <array>
#include <cstddef>

namespace reiterhom::fields {

using Point = std::array<double, 2>;

/// Uniform tensor mesh of an axis-aligned box in one or two dimensions.
///
/// A non-periodic mesh with n cells per axis has n + 1 nodes per axis. A
/// periodic mesh identifies opposite faces and stores only n nodes per axis
/// (the node on the upper face is the node on the lower face). Nodes are
/// numbered x-fastest: index = i + nodes_per_axis * j.
class Mesh {
 public:
  static constexpr int kMaxCells2d = 512;

  static Mesh interval(double lo, double hi, int n, bool periodic = false);
  static Mesh box(Point lo, Point hi, int n, bool periodic = false);
  /// Periodic cell (0, length)^dim.
  static Mesh unit_cell(int dim, int n, double length = 1.0);

  int dim() const noexcept { return dim_; }
  int cells_per_axis() const noexcept { return n_; }
  bool periodic() const noexcept { return periodic_; }
  Point lower() const noexcept { return lo_; }
  Point upper() const noexcept { return hi_; }
  double length(int axis) const noexcept { return hi_[axis] - lo_[axis]; }
  double spacing(int axis) const noexcept { return length(axis) / n_; }
  double max_spacing() const noexcept;

  int nodes_per_axis() const noexcept { return periodic_ ? n_ : n_ + 1; }
  std::size_t node_count() const noexcept;
  std::size_t cell_count() const noexcept;
  double volume() const noexcept;

  Point node(std::size_t index) const noexcept;
  std::array<int, 2> node_coords(std::size_t index) const noexcept;
  std::size_t node_index(int i, int j = 0) const noexcept;
  /// Index along one axis with periodic wrap (periodic meshes only).
  int wrap(int i) const noexcept;
  bool on_boundary(std::size_t index) const noexcept;
  bool contains(Point p, double tol = 1e-12) const noexcept;

  /// Nodal quadrature weight: trapezoidal on bounded meshes, uniform on
  /// periodic ones. Weights sum to volume().
  double weight(std::size_t index) const noexcept;

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  Mesh(int dim, Point lo, Point hi, int n, bool periodic);

  int dim_ = 1;
  Point lo_{0.0, 0.0};
  Point hi_{1.0, 0.0};
  int n_ = 2;
  bool periodic_ = false;
};

}  // namespace reiterhom::fields

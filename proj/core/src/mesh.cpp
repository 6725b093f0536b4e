#include "reiterhom/mesh.hpp"

#include <cmath>

#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::fields {

Mesh::Mesh(int dim, Point lo, Point hi, int n, bool periodic)
    : dim_(dim), lo_(lo), hi_(hi), n_(n), periodic_(periodic) {
  if (dim != 1 && dim != 2) throw Error(Errc::domain, fmt::format("mesh dimension {} unsupported", dim));
  if (n < 2) throw Error(Errc::domain, fmt::format("mesh needs at least 2 cells per axis, got {}", n));
  if (dim == 2 && n > kMaxCells2d) {
    throw Error(Errc::resource, fmt::format("2D meshes are limited to {} cells per axis, got {}",
                                            kMaxCells2d, n));
  }
  for (int a = 0; a < dim; ++a) {
    if (!(hi[a] > lo[a])) throw Error(Errc::domain, "mesh box must have positive extent");
  }
  if (dim == 1) {
    lo_[1] = 0.0;
    hi_[1] = 0.0;
  }
}

Mesh Mesh::interval(double lo, double hi, int n, bool periodic) {
  return Mesh(1, {lo, 0.0}, {hi, 0.0}, n, periodic);
}

Mesh Mesh::box(Point lo, Point hi, int n, bool periodic) { return Mesh(2, lo, hi, n, periodic); }

Mesh Mesh::unit_cell(int dim, int n, double length) {
  return Mesh(dim, {0.0, 0.0}, {length, length}, n, true);
}

double Mesh::max_spacing() const noexcept {
  double h = spacing(0);
  if (dim_ == 2) h = std::max(h, spacing(1));
  return h;
}

std::size_t Mesh::node_count() const noexcept {
  const auto m = static_cast<std::size_t>(nodes_per_axis());
  return dim_ == 1 ? m : m * m;
}

std::size_t Mesh::cell_count() const noexcept {
  const auto m = static_cast<std::size_t>(n_);
  return dim_ == 1 ? m : m * m;
}

double Mesh::volume() const noexcept { return dim_ == 1 ? length(0) : length(0) * length(1); }

std::array<int, 2> Mesh::node_coords(std::size_t index) const noexcept {
  const auto m = static_cast<std::size_t>(nodes_per_axis());
  if (dim_ == 1) return {static_cast<int>(index), 0};
  return {static_cast<int>(index % m), static_cast<int>(index / m)};
}

Point Mesh::node(std::size_t index) const noexcept {
  const auto ij = node_coords(index);
  Point p{lo_[0] + spacing(0) * ij[0], 0.0};
  if (dim_ == 2) p[1] = lo_[1] + spacing(1) * ij[1];
  return p;
}

std::size_t Mesh::node_index(int i, int j) const noexcept {
  return static_cast<std::size_t>(i) +
         static_cast<std::size_t>(nodes_per_axis()) * static_cast<std::size_t>(j);
}

int Mesh::wrap(int i) const noexcept {
  const int m = nodes_per_axis();
  i %= m;
  return i < 0 ? i + m : i;
}

bool Mesh::on_boundary(std::size_t index) const noexcept {
  if (periodic_) return false;
  const auto ij = node_coords(index);
  for (int a = 0; a < dim_; ++a) {
    if (ij[a] == 0 || ij[a] == n_) return true;
  }
  return false;
}

bool Mesh::contains(Point p, double tol) const noexcept {
  for (int a = 0; a < dim_; ++a) {
    const double slack = tol * std::max(1.0, length(a));
    if (p[a] < lo_[a] - slack || p[a] > hi_[a] + slack) return false;
  }
  return true;
}

double Mesh::weight(std::size_t index) const noexcept {
  const auto ij = node_coords(index);
  double w = 1.0;
  for (int a = 0; a < dim_; ++a) {
    double wa = spacing(a);
    if (!periodic_ && (ij[a] == 0 || ij[a] == n_)) wa *= 0.5;
    w *= wa;
  }
  return w;
}

}  // namespace reiterhom::fields

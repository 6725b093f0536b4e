#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "reiterhom/mesh.hpp"

namespace reiterhom::fields {

enum class FieldKind { scalar, vector };

/// Nodal values on a Mesh; vector fields store mesh.dim() components per node
/// (node-major). Immutable after construction.
class Field {
 public:
  Field(Mesh mesh, FieldKind kind, std::vector<double> values);

  static Field zeros(const Mesh& mesh, FieldKind kind = FieldKind::scalar);
  static Field sample(const Mesh& mesh, const std::function<double(Point)>& fn);

  const Mesh& mesh() const noexcept { return mesh_; }
  FieldKind kind() const noexcept { return kind_; }
  int components() const noexcept { return kind_ == FieldKind::scalar ? 1 : mesh_.dim(); }
  std::span<const double> values() const noexcept { return values_; }

  double operator[](std::size_t node) const noexcept { return values_[node]; }
  double value(std::size_t node, int component) const noexcept {
    return values_[node * components() + component];
  }
  /// Euclidean magnitude at a node.
  double magnitude(std::size_t node) const noexcept;
  double max_magnitude() const noexcept;

  /// Multilinear interpolation of one component; periodic meshes wrap the
  /// argument, bounded meshes clamp it to the box.
  double interpolate(Point p, int component = 0) const noexcept;

 private:
  Mesh mesh_;
  FieldKind kind_;
  std::vector<double> values_;
};

/// a * u + b * v on a common mesh.
Field combine(double a, const Field& u, double b, const Field& v);

/// Nodal-quadrature integral of a scalar field.
double integrate(const Field& u);

/// Resamples a scalar field onto another mesh by multilinear interpolation.
Field resample(const Field& u, const Mesh& target);

/// CSV with the one-line header
///   # reiterhom field v1 dim=<d> n=<n> periodic=<0|1>
/// followed by one `x[,y],value...` row per node.
void write_csv(std::ostream& out, const Field& u);
Field read_csv(std::istream& in);

}  // namespace reiterhom::fields

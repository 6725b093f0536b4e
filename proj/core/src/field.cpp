#include "reiterhom/field.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "reiterhom/error.hpp"

namespace reiterhom::fields {

Field::Field(Mesh mesh, FieldKind kind, std::vector<double> values)
    : mesh_(std::move(mesh)), kind_(kind), values_(std::move(values)) {
  const std::size_t expected = mesh_.node_count() * static_cast<std::size_t>(components());
  if (values_.size() != expected) {
    throw Error(Errc::shape, fmt::format("field has {} values, mesh expects {}", values_.size(), expected));
  }
}

Field Field::zeros(const Mesh& mesh, FieldKind kind) {
  const std::size_t comps = kind == FieldKind::scalar ? 1 : static_cast<std::size_t>(mesh.dim());
  return Field(mesh, kind, std::vector<double>(mesh.node_count() * comps, 0.0));
}

Field Field::sample(const Mesh& mesh, const std::function<double(Point)>& fn) {
  std::vector<double> values(mesh.node_count());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(mesh.node(i));
  return Field(mesh, FieldKind::scalar, std::move(values));
}

double Field::magnitude(std::size_t node) const noexcept {
  const int c = components();
  if (c == 1) return std::abs(values_[node]);
  double s = 0.0;
  for (int k = 0; k < c; ++k) s += values_[node * c + k] * values_[node * c + k];
  return std::sqrt(s);
}

double Field::max_magnitude() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < mesh_.node_count(); ++i) m = std::max(m, magnitude(i));
  return m;
}

double Field::interpolate(Point p, int component) const noexcept {
  const int dim = mesh_.dim();
  const int n = mesh_.cells_per_axis();
  std::array<int, 2> i0{0, 0};
  std::array<int, 2> i1{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    double s = (p[a] - mesh_.lower()[a]) / mesh_.spacing(a);
    if (mesh_.periodic()) {
      s -= n * std::floor(s / n);
      int i = static_cast<int>(std::floor(s));
      t[a] = s - i;
      i0[a] = mesh_.wrap(i);
      i1[a] = mesh_.wrap(i + 1);
    } else {
      s = std::clamp(s, 0.0, static_cast<double>(n));
      int i = std::min(static_cast<int>(std::floor(s)), n - 1);
      t[a] = s - i;
      i0[a] = i;
      i1[a] = i + 1;
    }
  }
  const int c = components();
  auto at = [&](int i, int j) { return values_[mesh_.node_index(i, j) * c + component]; };
  if (dim == 1) return (1.0 - t[0]) * at(i0[0], 0) + t[0] * at(i1[0], 0);
  return (1.0 - t[0]) * (1.0 - t[1]) * at(i0[0], i0[1]) + t[0] * (1.0 - t[1]) * at(i1[0], i0[1]) +
         (1.0 - t[0]) * t[1] * at(i0[0], i1[1]) + t[0] * t[1] * at(i1[0], i1[1]);
}

Field combine(double a, const Field& u, double b, const Field& v) {
  if (!(u.mesh() == v.mesh()) || u.kind() != v.kind()) {
    throw Error(Errc::shape, "combine: fields live on different meshes or kinds");
  }
  std::vector<double> out(u.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u.values()[i] + b * v.values()[i];
  return Field(u.mesh(), u.kind(), std::move(out));
}

double integrate(const Field& u) {
  if (u.kind() != FieldKind::scalar) throw Error(Errc::kind, "integrate expects a scalar field");
  double s = 0.0;
  for (std::size_t i = 0; i < u.mesh().node_count(); ++i) s += u.mesh().weight(i) * u[i];
  return s;
}

Field resample(const Field& u, const Mesh& target) {
  if (u.kind() != FieldKind::scalar) throw Error(Errc::kind, "resample expects a scalar field");
  return Field::sample(target, [&](Point p) { return u.interpolate(p); });
}

void write_csv(std::ostream& out, const Field& u) {
  const Mesh& m = u.mesh();
  fmt::print(out, "# reiterhom field v1 dim={} n={} periodic={}{}\n", m.dim(), m.cells_per_axis(),
             m.periodic() ? 1 : 0, u.kind() == FieldKind::vector ? " kind=vector" : "");
  const int c = u.components();
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    const Point p = m.node(i);
    std::string row = fmt::format("{}", p[0]);
    if (m.dim() == 2) row += fmt::format(",{}", p[1]);
    for (int k = 0; k < c; ++k) row += fmt::format(",{}", u.value(i, k));
    out << row << '\n';
  }
}

Field read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# reiterhom field v1", 0) != 0) {
    throw Error(Errc::io, "missing '# reiterhom field v1' header");
  }
  int dim = 0;
  int n = 0;
  int periodic = 0;
  bool vector = false;
  std::istringstream hs(header.substr(20));
  std::string token;
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    if (key == "dim") dim = std::stoi(val);
    if (key == "n") n = std::stoi(val);
    if (key == "periodic") periodic = std::stoi(val);
    if (key == "kind") vector = val == "vector";
  }
  if (dim < 1 || dim > 2 || n < 2) throw Error(Errc::io, "malformed field header");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const int comps = vector ? dim : 1;
  const int m = periodic ? n : n + 1;
  const std::size_t nodes = dim == 1 ? static_cast<std::size_t>(m) : static_cast<std::size_t>(m) * m;
  if (rows.size() != nodes) throw Error(Errc::io, "field row count does not match header");
  for (const auto& r : rows) {
    if (r.size() != static_cast<std::size_t>(dim + comps)) throw Error(Errc::io, "field row has wrong width");
  }
  Point lo{rows.front()[0], dim == 2 ? rows.front()[1] : 0.0};
  Point last{rows.back()[0], dim == 2 ? rows.back()[1] : 0.0};
  Point hi = last;
  for (int a = 0; a < dim; ++a) {
    const double h = (last[a] - lo[a]) / (m - 1);
    if (periodic) hi[a] = lo[a] + h * n;
  }
  const Mesh mesh = dim == 1 ? Mesh::interval(lo[0], hi[0], n, periodic != 0)
                             : Mesh::box(lo, hi, n, periodic != 0);
  std::vector<double> values;
  values.reserve(nodes * comps);
  for (const auto& r : rows) {
    for (int k = 0; k < comps; ++k) values.push_back(r[dim + k]);
  }
  return Field(mesh, vector ? FieldKind::vector : FieldKind::scalar, std::move(values));
}

}  // namespace reiterhom::fields

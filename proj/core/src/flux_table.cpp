#include "reiterhom/flux_table.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "reiterhom/error.hpp"
#include "reiterhom/parallel.hpp"

namespace reiterhom::cell {

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw Error(Errc::shape, fmt::format("flux table {} grid is empty", name));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw Error(Errc::domain, fmt::format("flux table {} grid is not finite", name));
    if (i > 0 && !(g[i] > g[i - 1])) {
      throw Error(Errc::domain, fmt::format("flux table {} grid is not strictly increasing", name));
    }
  }
}

struct Locate {
  std::size_t i = 0;
  double t = 0.0;
  double h = 0.0;  // cell width, 0 for a single-point axis
};

// A single-point r grid means the flux ignores r, so it never clamps.
Locate locate(const std::vector<double>& g, double v, bool& clamped, bool single_is_constant = false) {
  if (g.size() == 1) {
    if (v != g[0] && !single_is_constant) clamped = true;
    return {};
  }
  if (v < g.front() || v > g.back()) {
    clamped = true;
    v = std::clamp(v, g.front(), g.back());
  }
  const auto it = std::upper_bound(g.begin(), g.end(), v);
  std::size_t i = static_cast<std::size_t>(it - g.begin());
  i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
  const double h = g[i + 1] - g[i];
  return {i, (v - g[i]) / h, h};
}

std::string format_grid(const std::vector<double>& g) {
  std::string s = "[";
  for (std::size_t i = 0; i < g.size(); ++i) s += fmt::format("{}{:.17g}", i ? ", " : "", g[i]);
  return s + "]";
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(Errc::config, "linspace needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

FluxTable::FluxTable(int dim, std::vector<double> r_grid, std::array<std::vector<double>, 2> xi_grid,
                     std::vector<Vec> q)
    : dim_(dim), r_(std::move(r_grid)), xi_(std::move(xi_grid)), q_(std::move(q)) {
  if (dim != 1 && dim != 2) throw Error(Errc::shape, "flux table dimension must be 1 or 2");
  if (dim == 1) xi_[1] = {0.0};
  check_grid(r_, "r");
  check_grid(xi_[0], "xi_1");
  check_grid(xi_[1], "xi_2");
  const std::size_t expect = r_.size() * xi_[0].size() * xi_[1].size();
  if (q_.size() != expect) {
    throw Error(Errc::shape, fmt::format("flux table has {} values, grid needs {}", q_.size(), expect));
  }
  for (const Vec& v : q_) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw Error(Errc::domain, "flux table entry is not finite");
  }
}

FluxTable FluxTable::from_function(int dim, std::vector<double> r_grid, std::array<std::vector<double>, 2> xi_grid,
                                   const std::function<Vec(double, Vec)>& q) {
  if (dim == 1) xi_grid[1] = {0.0};
  std::vector<Vec> values;
  values.reserve(r_grid.size() * xi_grid[0].size() * xi_grid[1].size());
  for (double r : r_grid) {
    for (double a : xi_grid[0]) {
      for (double b : xi_grid[1]) values.push_back(q(r, Vec{a, b}));
    }
  }
  return FluxTable(dim, std::move(r_grid), std::move(xi_grid), std::move(values));
}

FluxTable::Query FluxTable::evaluate(double r, Vec xi) const {
  Query out;
  if (dim_ == 1) xi[1] = 0.0;
  const std::array<Locate, 3> loc{locate(r_, r, out.clamped, true), locate(xi_[0], xi[0], out.clamped),
                                  locate(xi_[1], xi[1], out.clamped)};
  std::array<Vec, 3> grad{};  // d/dr, d/dxi_1, d/dxi_2
  for (int corner = 0; corner < 8; ++corner) {
    std::array<int, 3> bit{corner & 1, (corner >> 1) & 1, (corner >> 2) & 1};
    bool valid = true;
    std::array<double, 3> w{};
    std::array<double, 3> dw{};
    for (int a = 0; a < 3; ++a) {
      if (loc[a].h == 0.0) {
        valid = valid && bit[a] == 0;
        w[a] = 1.0;
        dw[a] = 0.0;
      } else {
        w[a] = bit[a] ? loc[a].t : 1.0 - loc[a].t;
        dw[a] = (bit[a] ? 1.0 : -1.0) / loc[a].h;
      }
    }
    if (!valid) continue;
    const Vec& v = at(loc[0].i + bit[0], loc[1].i + bit[1], loc[2].i + bit[2]);
    const double weight = w[0] * w[1] * w[2];
    const std::array<double, 3> dweight{dw[0] * w[1] * w[2], w[0] * dw[1] * w[2], w[0] * w[1] * dw[2]};
    for (int c = 0; c < dim_; ++c) {
      out.q[c] += weight * v[c];
      for (int a = 0; a < 3; ++a) grad[a][c] += dweight[a] * v[c];
    }
  }
  out.dq_dr = grad[0];
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) out.dq_dxi[i][j] = grad[1 + j][i];
  }
  return out;
}

void write_csv(std::ostream& out, const FluxTable& table) {
  const int d = table.dim();
  out << "# reiterhom flux_table v1\n# {\n";
  std::map<std::string, std::string> meta = table.metadata;
  meta["dim"] = std::to_string(d);
  meta["r_grid"] = format_grid(table.r_grid());
  meta["xi_1_grid"] = format_grid(table.xi_grid(0));
  if (d == 2) meta["xi_2_grid"] = format_grid(table.xi_grid(1));
  std::size_t k = 0;
  for (const auto& [key, value] : meta) {
    out << fmt::format("#   \"{}\": {}{}\n", key, value, ++k < meta.size() ? "," : "");
  }
  out << "# }\n";
  out << (d == 1 ? "r,xi_1,q_1\n" : "r,xi_1,xi_2,q_1,q_2\n");
  for (std::size_t ir = 0; ir < table.r_grid().size(); ++ir) {
    for (std::size_t i0 = 0; i0 < table.xi_grid(0).size(); ++i0) {
      for (std::size_t i1 = 0; i1 < table.xi_grid(1).size(); ++i1) {
        const Vec& q = table.at(ir, i0, i1);
        if (d == 1) {
          out << fmt::format("{:.17g},{:.17g},{:.17g}\n", table.r_grid()[ir], table.xi_grid(0)[i0], q[0]);
        } else {
          out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", table.r_grid()[ir], table.xi_grid(0)[i0],
                             table.xi_grid(1)[i1], q[0], q[1]);
        }
      }
    }
  }
}

FluxTable read_csv_table(std::istream& in) {
  std::string line;
  std::map<std::string, std::string> meta;
  int dim = 0;
  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto q1 = line.find('"');
      const auto q2 = q1 == std::string::npos ? q1 : line.find('"', q1 + 1);
      const auto colon = q2 == std::string::npos ? q2 : line.find(':', q2);
      if (colon == std::string::npos) continue;
      std::string value = line.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      if (!value.empty() && value.back() == ',') value.pop_back();
      meta[line.substr(q1 + 1, q2 - q1 - 1)] = value;
      continue;
    }
    if (line.rfind("r,", 0) == 0) {
      dim = line == "r,xi_1,q_1" ? 1 : line == "r,xi_1,xi_2,q_1,q_2" ? 2 : 0;
      if (dim == 0) throw Error(Errc::io, fmt::format("unrecognized flux table header '{}'", line));
      continue;
    }
    if (dim == 0) throw Error(Errc::io, "flux table data before header");
    std::array<double, 5> row{};
    std::istringstream ss(line);
    std::string cell;
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 2 * dim + 1) throw Error(Errc::io, fmt::format("too many columns in '{}'", line));
      try {
        row[k++] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(Errc::io, fmt::format("bad number '{}' in flux table", cell));
      }
    }
    if (k != 2 * dim + 1) throw Error(Errc::io, fmt::format("too few columns in '{}'", line));
    rows.push_back(row);
  }
  if (dim == 0 || rows.empty()) throw Error(Errc::io, "flux table has no data");
  std::set<double> rs, x0, x1;
  for (const auto& row : rows) {
    rs.insert(row[0]);
    x0.insert(row[1]);
    x1.insert(dim == 2 ? row[2] : 0.0);
  }
  std::vector<double> r_grid(rs.begin(), rs.end());
  std::array<std::vector<double>, 2> xi{std::vector<double>(x0.begin(), x0.end()),
                                         std::vector<double>(x1.begin(), x1.end())};
  if (rows.size() != r_grid.size() * xi[0].size() * xi[1].size()) {
    throw Error(Errc::io, "flux table rows do not form a tensor grid");
  }
  std::vector<Vec> q(rows.size());
  for (const auto& row : rows) {
    const auto pos = [](const std::vector<double>& g, double v) {
      return static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), v) - g.begin());
    };
    const std::size_t idx =
        (pos(r_grid, row[0]) * xi[0].size() + pos(xi[0], row[1])) * xi[1].size() + pos(xi[1], dim == 2 ? row[2] : 0.0);
    q[idx] = dim == 1 ? Vec{row[2], 0.0} : Vec{row[3], row[4]};
  }
  meta.erase("dim");
  meta.erase("r_grid");
  meta.erase("xi_1_grid");
  meta.erase("xi_2_grid");
  FluxTable table(dim, std::move(r_grid), std::move(xi), std::move(q));
  table.metadata = std::move(meta);
  return table;
}

FluxTable tabulate_flux(const coeff::Coefficient& c, std::vector<double> r_grid,
                        std::array<std::vector<double>, 2> xi_grid, const fields::Mesh& mesh_y,
                        const fields::Mesh& mesh_z, const TableOptions& options) {
  if (c.dim == 1) xi_grid[1] = {0.0};
  check_grid(r_grid, "r");
  check_grid(xi_grid[0], "xi_1");
  check_grid(xi_grid[1], "xi_2");
  const std::size_t nr = c.zeta_dependent ? r_grid.size() : 1;
  const std::size_t nxi = xi_grid[0].size() * xi_grid[1].size();
  std::vector<Vec> solved(nr * nxi);
  parallel_for(solved.size(), options.jobs, [&](std::size_t k) {
    const double r = r_grid[k / nxi];
    const std::size_t j = k % nxi;
    const Vec xi{xi_grid[0][j / xi_grid[1].size()], xi_grid[1][j % xi_grid[1].size()]};
    CellOptions cell = options.cell;
    cell.tangent = false;
    try {
      const NestedCellSolver solver(c, mesh_y, mesh_z, cell);
      solved[k] = solver.solve_y(r, xi).flux_sample;
    } catch (const SolverError& e) {
      throw SolverError(e.code(), fmt::format("tabulating q at r={} xi=({}, {}): {}", r, xi[0], xi[1], e.message()),
                        e.residual_history());
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("tabulating q at r={} xi=({}, {}): {}", r, xi[0], xi[1], e.message()));
    }
  });
  std::vector<Vec> q;
  q.reserve(r_grid.size() * nxi);
  for (std::size_t ir = 0; ir < r_grid.size(); ++ir) {
    const std::size_t src = c.zeta_dependent ? ir : 0;
    q.insert(q.end(), solved.begin() + static_cast<std::ptrdiff_t>(src * nxi),
             solved.begin() + static_cast<std::ptrdiff_t>((src + 1) * nxi));
  }
  FluxTable table(c.dim, std::move(r_grid), std::move(xi_grid), std::move(q));
  table.metadata["problem"] = fmt::format("\"{}\"", c.name);
  table.metadata["cell_n_y"] = std::to_string(mesh_y.cells_per_axis());
  table.metadata["cell_n_z"] = std::to_string(mesh_z.cells_per_axis());
  return table;
}

}  // namespace reiterhom::cell

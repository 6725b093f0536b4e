#include <cmath>

#include <fmt/format.h>

#include "reiterhom/error.hpp"
#include "reiterhom/norms.hpp"
#include "reiterhom/parallel.hpp"
#include "reiterhom/solver.hpp"

namespace reiterhom::solver {

CorrectorSet compute_correctors(const Field& u0, const coeff::Coefficient& c, const Mesh& mesh_y,
                                const Mesh& mesh_z, const CorrectorOptions& options) {
  if (u0.kind() != fields::FieldKind::scalar) throw Error(Errc::kind, "correctors need a scalar macroscopic field");
  const Mesh& macro = u0.mesh();
  const int d = macro.dim();
  if (c.dim != d) throw Error(Errc::shape, "coefficient and macroscopic mesh dimensions differ");
  if (options.recon_n < 1) throw Error(Errc::config, "recon_n must be positive");
  const Mesh x_mesh = d == 1 ? Mesh::interval(macro.lower()[0], macro.upper()[0], options.recon_n)
                             : Mesh::box(macro.lower(), macro.upper(), options.recon_n);
  Field du0 = fields::gradient(u0);

  const fields::CellGridShape ys{d, mesh_y.cells_per_axis(), mesh_y.length(0)};
  const fields::CellGridShape zs{d, mesh_z.cells_per_axis(), mesh_z.length(0)};
  const fields::CellGridShape none{d, 1, mesh_z.length(0)};
  const std::size_t nx = x_mesh.node_count();
  const std::size_t ny = ys.size();
  const std::size_t nz = zs.size();

  std::vector<double> pi1(nx * ny), pi2(nx * ny * nz);
  std::array<std::vector<double>, 2> g1{std::vector<double>(nx * ny, 0.0), std::vector<double>(nx * ny, 0.0)};
  std::array<std::vector<double>, 2> g2{std::vector<double>(nx * ny * nz, 0.0),
                                        std::vector<double>(nx * ny * nz, 0.0)};
  cell::CellOptions cell = options.cell;
  cell.tangent = false;

  parallel_for(nx, options.jobs, [&](std::size_t i) {
    const Point x = x_mesh.node(i);
    const double r = u0.interpolate(x);
    const cell::Vec xi{du0.interpolate(x, 0), d > 1 ? du0.interpolate(x, 1) : 0.0};
    try {
      const cell::NestedCellSolver solver(c, mesh_y, mesh_z, cell);
      const cell::CellSolution sy = solver.solve_y(r, xi);
      const Field gy = fields::gradient(sy.corrector);
      for (std::size_t j = 0; j < ny; ++j) {
        pi1[i * ny + j] = sy.corrector[j];
        cell::Vec shifted = xi;
        for (int a = 0; a < d; ++a) {
          g1[a][i * ny + j] = gy.value(j, a);
          shifted[a] += gy.value(j, a);
        }
        const Point y = mesh_y.node(j);
        const cell::CellSolution sz = solver.solve_z(std::span<const double>(y.data(), d), r, shifted);
        const Field gz = fields::gradient(sz.corrector);
        for (std::size_t k = 0; k < nz; ++k) {
          const std::size_t idx = (i * ny + j) * nz + k;
          pi2[idx] = sz.corrector[k];
          for (int a = 0; a < d; ++a) g2[a][idx] = gz.value(k, a);
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("corrector at x=({}, {}), r={}, xi=({}, {}): {}", x[0], x[1], r, xi[0],
                                        xi[1], e.message()));
    }
  });

  auto term = [&](const fields::CellGridShape& z, std::vector<double> v) {
    return fields::TabulatedTerm{x_mesh, ys, z, std::move(v)};
  };
  return CorrectorSet{d,
                      u0,
                      std::move(du0),
                      term(none, std::move(pi1)),
                      term(zs, std::move(pi2)),
                      {term(none, std::move(g1[0])), term(none, std::move(g1[1]))},
                      {term(zs, std::move(g2[0])), term(zs, std::move(g2[1]))},
                      nx * (1 + ny)};
}

Reconstruction corrector_reconstruct(const CorrectorSet& cs, double eps, const Mesh& fine) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(Errc::domain, fmt::format("eps = {} is outside (0, 1]", eps));
  if (fine.dim() != cs.dim) throw Error(Errc::shape, "reconstruction mesh dimension differs from the correctors");
  const int d = cs.dim;
  const std::size_t n = fine.node_count();
  std::vector<double> grad(n * static_cast<std::size_t>(d));
  std::vector<double> field(n);
  const double e2 = eps * eps;
  for (std::size_t p = 0; p < n; ++p) {
    const Point x = fine.node(p);
    const Point y{x[0] / eps, x[1] / eps};
    const Point z{x[0] / e2, x[1] / e2};
    const std::span<const double> ys(y.data(), d), zs(z.data(), d);
    for (int a = 0; a < d; ++a) {
      grad[p * d + a] = cs.du0.interpolate(x, a) + cs.grad_pi1[a](x, ys, zs) + cs.grad_pi2[a](x, ys, zs);
    }
    field[p] = cs.u0.interpolate(x) + eps * cs.pi1(x, ys, zs) + e2 * cs.pi2(x, ys, zs);
  }
  return Reconstruction{Field(fine, fields::FieldKind::vector, std::move(grad)),
                        Field(fine, fields::FieldKind::scalar, std::move(field))};
}

}  // namespace reiterhom::solver

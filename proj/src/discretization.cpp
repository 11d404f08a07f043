// SPDX-License-Identifier: MIT
#include "rte/discretization.hpp"

namespace rte {

Discretization discretize(const MaterialField& field, int I, int L,
                          const QuadratureSet& quad, double g, double delta) {
  Discretization d;
  d.mesh = build_hierarchy(I, L);
  d.quad = quad;
  d.kernel = discrete_kernel(quad, g);
  d.delta = delta;

  const double h = d.mesh.h;
  d.optics.resize(d.n_cells());
  d.basis.resize(d.n_cells());
  for (int cy = 0; cy < I; ++cy) {
    for (int cx = 0; cx < I; ++cx) {
      int id = d.mesh.cell_id(cx, cy);
      double x0 = cx * h, y0 = cy * h;
      d.optics[id] = cell_average(field, id, x0, y0, h);
      d.basis[id] =
          build_cell_basis(d.optics[id], d.quad, d.kernel, x0, y0, h, delta);
    }
  }

  d.proj.resize(d.mesh.n_ifaces());
  for (int id = 0; id < d.mesh.n_ifaces(); ++id) {
    const IfaceInfo& f = d.mesh.ifaces[id];
    const CellBasis* c0 = (f.cell[0] >= 0) ? &d.basis[f.cell[0]] : nullptr;
    const CellBasis* c1 = (f.cell[1] >= 0) ? &d.basis[f.cell[1]] : nullptr;
    d.proj[id] = build_projection(f, id, c0, c1, d.quad);
  }
  return d;
}

}  // namespace rte

// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "rte/basis.hpp"
#include "rte/materials.hpp"
#include "rte/mesh.hpp"
#include "rte/projection.hpp"
#include "rte/quadrature.hpp"

namespace rte {

// Everything derived from (material, mesh, quadrature, kernel, delta):
// per-cell optics and bases, per-interface projections.
struct Discretization {
  MeshHierarchy mesh;
  QuadratureSet quad;
  KernelMatrix kernel;
  double delta = 0;

  std::vector<CellOptics> optics;  // per fine cell
  std::vector<CellBasis> basis;    // per fine cell
  std::vector<InterfaceProjection> proj;  // per fine interface id

  int n_dir() const { return quad.n_dir; }
  int n_cells() const { return mesh.I * mesh.I; }

  // One-sided trace of retained-mode combination `raw` (aligned with
  // basis[cell].retained) of `cell` at the midpoint of its edge `e`.
  Eigen::VectorXd retained_trace(int cell, int e,
                                 const Eigen::VectorXd& raw) const {
    const CellBasis& b = basis[cell];
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_dir());
    for (int j = 0; j < b.n_retained(); ++j) {
      int k = b.retained[j];
      out += raw[j] * b.edge_factor(e, k) * b.xi.col(k);
    }
    return out;
  }
};

Discretization discretize(const MaterialField& field, int I, int L,
                          const QuadratureSet& quad, double g, double delta);

}  // namespace rte

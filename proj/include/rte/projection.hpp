// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rte/basis.hpp"
#include "rte/mesh.hpp"

namespace rte {

// Per-interface mode spaces and the projection operator P_{delta,i}.
//
// Slow columns are the retained xi-vectors anchored at this interface from
// the adjacent cell(s) (side 0 first), orthogonalized by modified
// Gram-Schmidt and rescaled to unit max-norm. Fast columns are the discarded
// anchored xi-vectors, appended unchanged. project() returns the slow part
// of the expansion coefficients of a vector in this (generally non-
// orthogonal) basis.
//
// Boundary interfaces are restricted to the incoming half-space
// (n . u < 0): rows lists the 2M incoming direction indices and all columns
// hold only those components.
struct InterfaceProjection {
  int iface = -1;
  bool boundary = false;
  int dim = 0;     // 4M interior, 2M boundary
  int n_slow = 0;  // |V_{delta,i}|
  int side0_slow = 0;  // slow count contributed by side 0 (left/bottom)

  std::vector<int> rows;  // incoming direction indices (boundary only)

  Eigen::MatrixXd chi;  // dim x dim, [chi_slow | chi_fast]
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  // Source of each column: (side, mode index in that cell's basis).
  std::vector<std::pair<int, int>> slow_src;  // pre-orthogonalization order
  std::vector<std::pair<int, int>> fast_src;

  // Slow expansion coefficients of l (dim must match).
  Eigen::VectorXd project(const Eigen::VectorXd& l) const;

  // Full expansion coefficients (slow then fast).
  Eigen::VectorXd expand(const Eigen::VectorXd& l) const;

  // Restrict a full 4M vector to the incoming components (boundary only).
  Eigen::VectorXd restrict_incoming(const Eigen::VectorXd& full) const;
};

// cell0 / cell1 may be null for boundary interfaces (exactly one non-null).
InterfaceProjection build_projection(const IfaceInfo& info, int iface_id,
                                     const CellBasis* cell0,
                                     const CellBasis* cell1,
                                     const QuadratureSet& quad);

}  // namespace rte

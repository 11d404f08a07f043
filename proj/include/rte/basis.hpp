// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "rte/materials.hpp"
#include "rte/mesh.hpp"
#include "rte/quadrature.hpp"

namespace rte {

// Eigen-decomposition of M_x = D^{-1}(rho K W - I) (axis 0) or
// M_y = S^{-1}(rho K W - I) (axis 1). Eigenvalues real, sorted ascending;
// eigenvectors normalized to unit max-norm with a deterministic sign.
// Depends on (rho, quadrature, kernel) only; shared across cells.
struct EigenSystem {
  int axis = 0;  // 0 = x, 1 = y
  Eigen::VectorXd lambda;
  Eigen::MatrixXd xi;  // columns are eigenvectors
};

std::pair<std::shared_ptr<const EigenSystem>, std::shared_ptr<const EigenSystem>>
eigen_systems(const CellOptics& optics, const QuadratureSet& quad,
              const KernelMatrix& kernel);

// Per-cell fundamental-solution basis. Mode k (k < 4M: x system, else y
// system) evaluates as xi_k * exp(lambda_k Sigma_t (coord - anchor coord));
// lambda <= 0 anchors at the left/bottom edge, lambda > 0 at the right/top
// edge, so every mode decays into the cell.
struct CellBasis {
  int cell = -1;
  CellOptics optics;
  double h = 0;
  double x0 = 0, y0 = 0;  // lower-left corner
  double delta = 0;
  int n_dir = 0;    // 4M
  int n_modes = 0;  // 8M

  Eigen::VectorXd lambda;       // 8M, in Sigma_t units
  Eigen::MatrixXd xi;           // 4M x 8M
  std::vector<int> anchor;      // Edge per mode
  Eigen::VectorXd center_mag;   // exp(-|lambda| Sigma_t h / 2)
  Eigen::MatrixXd edge_factor;  // 4 x 8M: value multiplier at edge midpoints
  Eigen::VectorXd avg_factor;   // 8M: cell-average multiplier (exact)

  std::vector<int> retained;  // V_{delta,C}, ascending mode index
  std::vector<int> fast;      // complement of retained
  std::array<std::vector<int>, 4> retained_at;  // partition by anchor edge
  std::array<std::vector<int>, 4> fast_at;

  int n_retained() const { return static_cast<int>(retained.size()); }

  // Value multiplier of mode k at a point inside the closed cell.
  double value_factor(int k, double x, double y) const;

  // Trace of mode k at the midpoint of edge e: xi.col(k) * edge_factor(e,k).
};

CellBasis build_cell_basis(const CellOptics& optics, const QuadratureSet& quad,
                           const KernelMatrix& kernel, double x0, double y0,
                           double h, double delta);

// Re-apply the selection threshold to an existing basis (cheap).
void select_slow_basis(CellBasis& basis, double delta);

// Full 4M-vector evaluation of mode k at (x, y) inside the closed cell.
Eigen::VectorXd evaluate_basis(const CellBasis& basis, int k, double x, double y);

// Rank ratio sum |V_{delta,C}| / sum 8M over a set of cells.
double rank_ratio(const std::vector<CellBasis>& cells);

}  // namespace rte

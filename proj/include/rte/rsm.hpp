// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rte/discretization.hpp"

namespace rte {

// Row space at a level: boundary rows first (all fine boundary interfaces,
// ids ascending, n_slow rows each), then interior jump rows (fine interfaces
// on level-l interior lines, ids ascending). Rows and per-cell coefficient
// slots have equal totals at every level.
struct RowLayout {
  std::vector<int> ifaces;     // listed interfaces
  std::vector<int> offset;     // row offset per listed interface
  std::vector<int> count;      // rows (= n_slow) per listed interface
  std::vector<int> offset_of;  // by interface id; -1 if absent at this level
  int rows = 0;
  int n_boundary_ifaces = 0;
};

// Coefficient slot: `count` coefficients of the cell's basis functions
// defined at fine interface `iface`, approached from `side`.
struct CoefSlot {
  int iface;
  int side;
  int count;
};

// Block column of B_l owned by one level-l cell.
struct BBlock {
  std::vector<int> rows;  // global row indices (concatenated per interface)
  Eigen::MatrixXd A;      // rows.size() x ncoef(cell)
};

struct LevelOps {
  int level = 0;
  RowLayout rows;
  std::vector<int> cell_offset, cell_size;  // per level-l cell
  std::vector<std::vector<CoefSlot>> slots;
  int ncoef = 0;
  std::vector<BBlock> B;
};

// Transfer between level l and l+1, blocks per level-(l+1) cell.
struct TransferOps {
  std::vector<int> R;  // rows(l+1) -> row index at level l
  std::vector<std::vector<int>> removed_rows;  // level-l row indices per cell
  std::vector<std::vector<int>> child_coef;    // level-l coef indices per cell
  std::vector<Eigen::MatrixXd> P;  // child_coef x ncoef(l+1, cell)
  std::vector<Eigen::MatrixXd> Q;  // child_coef x removed_rows(cell)
};

struct Factorization {
  int L = 0;
  std::vector<LevelOps> levels;       // 0..L
  std::vector<TransferOps> transfer;  // 0..L-1
  Eigen::MatrixXd coarse;             // dense B_L
  Eigen::PartialPivLU<Eigen::MatrixXd> coarse_lu;
  std::vector<long long> dimF;  // |F^(l)|, l = 0..L
  std::vector<long long> dimG;  // |G^(l)|, l = 1..L (index 0 unused)
  std::vector<Eigen::MatrixXd> E0;  // per fine cell: dual basis -> raw modes

  std::uint64_t storage_doubles() const;
};

Factorization factorize(const Discretization& d);

// Recursive two-level inversion. `flops` (optional) accumulates counted
// floating-point work (2mn per dense block apply, 2n^2 per dense solve).
Eigen::VectorXd apply_inverse(const Factorization& f, const Eigen::VectorXd& v,
                              std::uint64_t* flops = nullptr);

// Dense assembly of B_l from its blocks (tests / coarse level / oracle).
Eigen::MatrixXd dense_assemble(const Factorization& f, int l);

// Verification oracle: dense LU of B_0. Guarded at |F^(0)| <= 20000.
struct DenseInverse {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const { return lu.solve(v); }
};
DenseInverse dense_oracle_inverse(const Factorization& f);

// Serialization ("RSMF" magic, version u32, little-endian doubles).
void save_factorization(const Factorization& f, const std::string& path);
Factorization load_factorization(const std::string& path);

}  // namespace rte

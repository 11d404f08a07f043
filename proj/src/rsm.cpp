// SPDX-License-Identifier: MIT
#include "rte/rsm.hpp"

#include <cstring>
#include <fstream>
#include <unordered_map>

#include "rte/errors.hpp"

namespace rte {

namespace {

// Offset of a side's slow coordinates inside the interface's V ordering
// (side-0 modes first).
int side_offset(const InterfaceProjection& p, int side) {
  return (side == 1) ? p.side0_slow : 0;
}
int side_count(const InterfaceProjection& p, int side) {
  return (side == 1) ? p.n_slow - p.side0_slow : p.side0_slow;
}

// Which side of edge-e interfaces a cell is on: the cell is right of its
// left edge (side 1), left of its right edge (side 0), above its bottom
// edge (side 1), below its top edge (side 0).
int cell_side_of_edge(int e) {
  return (e == kLeft || e == kBottom) ? 1 : 0;
}

RowLayout make_row_layout(const Discretization& d, int l) {
  RowLayout lay;
  lay.offset_of.assign(d.mesh.n_ifaces(), -1);
  auto add = [&](int id) {
    lay.ifaces.push_back(id);
    lay.offset.push_back(lay.rows);
    int c = d.proj[id].n_slow;
    lay.count.push_back(c);
    lay.offset_of[id] = lay.rows;
    lay.rows += c;
  };
  for (int id : d.mesh.boundary_ifaces) add(id);
  lay.n_boundary_ifaces = static_cast<int>(lay.ifaces.size());
  for (int id : d.mesh.interior_at[l]) add(id);
  return lay;
}

struct CoefLayoutInfo {
  std::vector<int> cell_offset, cell_size;
  std::vector<std::vector<CoefSlot>> slots;
  int total = 0;
};

CoefLayoutInfo make_coef_layout(const Discretization& d, int l) {
  const int Il = d.mesh.cells_per_axis(l);
  CoefLayoutInfo lay;
  lay.cell_offset.resize(Il * Il);
  lay.cell_size.resize(Il * Il);
  lay.slots.resize(Il * Il);
  for (int CY = 0; CY < Il; ++CY) {
    for (int CX = 0; CX < Il; ++CX) {
      int c = CY * Il + CX;
      lay.cell_offset[c] = lay.total;
      int size = 0;
      for (int e = 0; e < 4; ++e) {
        int side = cell_side_of_edge(e);
        for (int id : d.mesh.coarse_edge_ifaces(l, CX, CY, e)) {
          int cnt = side_count(d.proj[id], side);
          lay.slots[c].push_back({id, side, cnt});
          size += cnt;
        }
      }
      lay.cell_size[c] = size;
      lay.total += size;
    }
  }
  return lay;
}

// Per fine cell, per edge: matrix whose column j is the trace of retained
// mode j at that edge's midpoint (n_dir x n_retained).
struct TraceTables {
  std::vector<std::array<Eigen::MatrixXd, 4>> Xe;
};

TraceTables make_trace_tables(const Discretization& d) {
  TraceTables t;
  t.Xe.resize(d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c) {
    const CellBasis& b = d.basis[c];
    for (int e = 0; e < 4; ++e) {
      Eigen::MatrixXd& X = t.Xe[c][e];
      X.resize(d.n_dir(), b.n_retained());
      for (int j = 0; j < b.n_retained(); ++j) {
        int k = b.retained[j];
        X.col(j) = b.edge_factor(e, k) * b.xi.col(k);
      }
    }
  }
  return t;
}

// Restrict a (n_dir x n) trace block to the incoming rows of a boundary
// interface.
Eigen::MatrixXd restrict_rows(const InterfaceProjection& p,
                              const Eigen::MatrixXd& T) {
  Eigen::MatrixXd out(p.rows.size(), T.cols());
  for (size_t r = 0; r < p.rows.size(); ++r) out.row(r) = T.row(p.rows[r]);
  return out;
}

}  // namespace

std::uint64_t Factorization::storage_doubles() const {
  std::uint64_t n = 0;
  for (const auto& lv : levels)
    for (const auto& blk : lv.B) n += blk.A.size();
  for (const auto& tr : transfer) {
    for (const auto& m : tr.P) n += m.size();
    for (const auto& m : tr.Q) n += m.size();
  }
  n += coarse.size();
  for (const auto& m : E0) n += m.size();
  return n;
}

Factorization factorize(const Discretization& d) {
  const MeshHierarchy& mesh = d.mesh;
  const int L = mesh.L;

  Factorization f;
  f.L = L;
  f.levels.resize(L + 1);
  f.transfer.resize(L);

  TraceTables traces = make_trace_tables(d);

  // Raw expansions per level: for each level-l cell, a matrix mapping that
  // cell's level-l basis coefficients to raw retained-mode coefficients over
  // its fine cells (ascending fine cell id). Per-cell raw row offsets of the
  // fine cells are tracked alongside.
  std::vector<Eigen::MatrixXd> Eraw;           // per current-level cell
  std::vector<std::unordered_map<int, int>> raw_off;  // fine cell -> row offset

  // ---- Level 0: per-cell dual bases -------------------------------------
  {
    LevelOps& lv = f.levels[0];
    lv.level = 0;
    lv.rows = make_row_layout(d, 0);
    CoefLayoutInfo cl = make_coef_layout(d, 0);
    lv.cell_offset = cl.cell_offset;
    lv.cell_size = cl.cell_size;
    lv.slots = cl.slots;
    lv.ncoef = cl.total;
    if (lv.ncoef != lv.rows.rows)
      throw SingularLocalSystem("factorize: level-0 row/coefficient mismatch");

    f.E0.resize(d.n_cells());
    Eraw.resize(d.n_cells());
    raw_off.resize(d.n_cells());
    for (int c = 0; c < d.n_cells(); ++c) {
      const CellBasis& b = d.basis[c];
      const int nC = b.n_retained();
      raw_off[c][c] = 0;
      Eigen::MatrixXd A(nC, nC);
      int r0 = 0;
      for (int e = 0; e < 4; ++e) {
        int cx = c % mesh.I, cy = c / mesh.I;
        int id = mesh.cell_edge_iface(cx, cy, e);
        const InterfaceProjection& p = d.proj[id];
        int side = cell_side_of_edge(e);
        int cnt = side_count(p, side);
        if (cnt == 0) continue;
        Eigen::MatrixXd T = traces.Xe[c][e];
        if (p.boundary) T = restrict_rows(p, T);
        Eigen::MatrixXd C = p.lu.solve(T);  // full expansion coefficients
        A.middleRows(r0, cnt) = C.middleRows(side_offset(p, side), cnt);
        r0 += cnt;
      }
      if (nC > 0) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rcond() < 1e-12)
          throw SingularLocalSystem(
              "factorize: near-singular level-0 dual system in cell " +
              std::to_string(c));
        f.E0[c] = lu.solve(Eigen::MatrixXd::Identity(nC, nC));
      } else {
        f.E0[c] = Eigen::MatrixXd(0, 0);
      }
      Eraw[c] = f.E0[c];
    }
  }

  // ---- Levels 1..L: local lifting solves ---------------------------------
  for (int l = 1; l <= L; ++l) {
    LevelOps& lv = f.levels[l];
    lv.level = l;
    lv.rows = make_row_layout(d, l);
    CoefLayoutInfo cl = make_coef_layout(d, l);
    lv.cell_offset = cl.cell_offset;
    lv.cell_size = cl.cell_size;
    lv.slots = cl.slots;
    lv.ncoef = cl.total;
    if (lv.ncoef != lv.rows.rows)
      throw SingularLocalSystem("factorize: row/coefficient mismatch at level " +
                                std::to_string(l));

    const LevelOps& prev = f.levels[l - 1];
    const int Il = mesh.cells_per_axis(l);
    const int Il1 = mesh.cells_per_axis(l - 1);

    TransferOps& tr = f.transfer[l - 1];
    tr.removed_rows.resize(Il * Il);
    tr.child_coef.resize(Il * Il);
    tr.P.resize(Il * Il);
    tr.Q.resize(Il * Il);

    std::vector<Eigen::MatrixXd> ErawNext(Il * Il);
    std::vector<std::unordered_map<int, int>> rawOffNext(Il * Il);

    for (int CY = 0; CY < Il; ++CY) {
      for (int CX = 0; CX < Il; ++CX) {
        const int C = CY * Il + CX;
        // Children in level-(l-1) id order: (2CX,2CY),(2CX+1,2CY),...
        int children[4] = {
            2 * CY * Il1 + 2 * CX, 2 * CY * Il1 + 2 * CX + 1,
            (2 * CY + 1) * Il1 + 2 * CX, (2 * CY + 1) * Il1 + 2 * CX + 1};
        int child_cxy[4][2] = {{2 * CX, 2 * CY},
                               {2 * CX + 1, 2 * CY},
                               {2 * CX, 2 * CY + 1},
                               {2 * CX + 1, 2 * CY + 1}};

        int n_unknown = 0;
        std::vector<int> child_col(4);
        for (int ch = 0; ch < 4; ++ch) {
          child_col[ch] = n_unknown;
          n_unknown += prev.cell_size[children[ch]];
          int g0 = prev.cell_offset[children[ch]];
          for (int j = 0; j < prev.cell_size[children[ch]]; ++j)
            tr.child_coef[C].push_back(g0 + j);
        }

        // Row map: removed rows first (interfaces ascending), then own slots.
        std::vector<int> removed = mesh.removed_inside(l, CX, CY);
        std::unordered_map<int, int> local_row;  // iface -> local row offset
        int n_rows = 0;
        for (int id : removed) {
          local_row[id] = n_rows;
          n_rows += d.proj[id].n_slow;
        }
        const int n_removed = n_rows;
        std::unordered_map<int, int> own_row;
        for (const CoefSlot& s : lv.slots[C]) {
          own_row[s.iface] = n_rows;
          n_rows += s.count;
        }
        if (n_rows != n_unknown)
          throw SingularLocalSystem("factorize: local system not square");

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_rows, n_unknown);
        for (int ch = 0; ch < 4; ++ch) {
          const int cc = children[ch];
          const int ccols = prev.cell_size[cc];
          if (ccols == 0) continue;
          for (int e = 0; e < 4; ++e) {
            int side = cell_side_of_edge(e);
            for (int id :
                 mesh.coarse_edge_ifaces(l - 1, child_cxy[ch][0], child_cxy[ch][1], e)) {
              const InterfaceProjection& p = d.proj[id];
              const IfaceInfo& info = mesh.ifaces[id];
              int fc = info.cell[side];  // fine cell inside this child
              Eigen::MatrixXd T =
                  traces.Xe[fc][info.edge_of[side]] *
                  Eraw[cc].middleRows(raw_off[cc][fc],
                                      d.basis[fc].n_retained());
              auto rit = local_row.find(id);
              if (rit != local_row.end()) {
                // removed interface: signed full projected jump rows
                if (p.n_slow == 0) continue;
                Eigen::MatrixXd Cf = p.lu.solve(T).topRows(p.n_slow);
                double sign = (side == 1) ? 1.0 : -1.0;
                A.block(rit->second, child_col[ch], p.n_slow, ccols) += sign * Cf;
              } else {
                // own interface of C: one-sided trace rows, own-side coords
                int cnt = side_count(p, side);
                if (cnt == 0) continue;
                if (p.boundary) T = restrict_rows(p, T);
                Eigen::MatrixXd Cf = p.lu.solve(T);
                A.block(own_row[id], child_col[ch], cnt, ccols) =
                    Cf.middleRows(side_offset(p, side), cnt);
              }
            }
          }
        }

        Eigen::MatrixXd X;
        if (n_rows > 0) {
          Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
          if (lu.rcond() < 1e-12)
            throw SingularLocalSystem(
                "factorize: near-singular lifting system at level " +
                std::to_string(l) + " cell " + std::to_string(C));
          X = lu.solve(Eigen::MatrixXd::Identity(n_rows, n_rows));
        } else {
          X = Eigen::MatrixXd(0, 0);
        }
        tr.Q[C] = X.leftCols(n_removed);
        tr.P[C] = X.rightCols(n_rows - n_removed);

        // Removed rows in global level-(l-1) row indices (same order).
        for (int id : removed) {
          int off = prev.rows.offset_of[id];
          for (int j = 0; j < d.proj[id].n_slow; ++j)
            tr.removed_rows[C].push_back(off + j);
        }

        // Raw expansion of this cell's F basis.
        int rdim = 0;
        for (int fc : mesh.fine_cells_of(l, CX, CY)) {
          rawOffNext[C][fc] = rdim;
          rdim += d.basis[fc].n_retained();
        }
        Eigen::MatrixXd Etmp = Eigen::MatrixXd::Zero(rdim, n_unknown);
        for (int ch = 0; ch < 4; ++ch) {
          const int cc = children[ch];
          for (const auto& [fc, off] : raw_off[cc]) {
            Etmp.block(rawOffNext[C][fc], child_col[ch],
                       d.basis[fc].n_retained(), prev.cell_size[cc]) =
                Eraw[cc].middleRows(off, d.basis[fc].n_retained());
          }
        }
        ErawNext[C] = Etmp * tr.P[C];
      }
    }

    // R selection: rows of layout l inside layout l-1.
    tr.R.resize(lv.rows.rows);
    for (size_t i = 0; i < lv.rows.ifaces.size(); ++i) {
      int id = lv.rows.ifaces[i];
      int off1 = lv.rows.offset[i];
      int off0 = prev.rows.offset_of[id];
      for (int j = 0; j < lv.rows.count[i]; ++j) tr.R[off1 + j] = off0 + j;
    }

    Eraw = std::move(ErawNext);
    raw_off = std::move(rawOffNext);
  }

  // ---- B blocks at every level -------------------------------------------
  // (Level-l Eraw is consumed as soon as its B is built; rebuild bottom-up.)
  // We rebuilt Eraw level by level above, so recompute B here level by level
  // with a second pass mirroring the expansions.
  {
    // Recompute raw expansions incrementally and assemble B_l at each level.
    std::vector<Eigen::MatrixXd> E;  // per current-level cell
    std::vector<std::unordered_map<int, int>> off(d.n_cells());
    E.resize(d.n_cells());
    for (int c = 0; c < d.n_cells(); ++c) {
      E[c] = f.E0[c];
      off[c][c] = 0;
    }

    for (int l = 0; l <= L; ++l) {
      LevelOps& lv = f.levels[l];
      const int Il = mesh.cells_per_axis(l);
      if (l > 0) {
        // lift expansions using stored transfer P blocks
        const TransferOps& tr = f.transfer[l - 1];
        const LevelOps& prev = f.levels[l - 1];
        const int Il1 = mesh.cells_per_axis(l - 1);
        std::vector<Eigen::MatrixXd> En(Il * Il);
        std::vector<std::unordered_map<int, int>> offn(Il * Il);
        for (int CY = 0; CY < Il; ++CY) {
          for (int CX = 0; CX < Il; ++CX) {
            const int C = CY * Il + CX;
            int children[4] = {
                2 * CY * Il1 + 2 * CX, 2 * CY * Il1 + 2 * CX + 1,
                (2 * CY + 1) * Il1 + 2 * CX, (2 * CY + 1) * Il1 + 2 * CX + 1};
            int rdim = 0;
            for (int fc : mesh.fine_cells_of(l, CX, CY)) {
              offn[C][fc] = rdim;
              rdim += d.basis[fc].n_retained();
            }
            Eigen::MatrixXd Etmp = Eigen::MatrixXd::Zero(rdim, tr.P[C].rows());
            int colpos = 0;
            for (int ch = 0; ch < 4; ++ch) {
              const int cc = children[ch];
              for (const auto& [fc, o] : off[cc]) {
                Etmp.block(offn[C][fc], colpos, d.basis[fc].n_retained(),
                           prev.cell_size[cc]) =
                    E[cc].middleRows(o, d.basis[fc].n_retained());
              }
              colpos += prev.cell_size[cc];
            }
            En[C] = Etmp * tr.P[C];
          }
        }
        E = std::move(En);
        off = std::move(offn);
      }

      lv.B.resize(Il * Il);
      for (int CY = 0; CY < Il; ++CY) {
        for (int CX = 0; CX < Il; ++CX) {
          const int C = CY * Il + CX;
          BBlock& blk = lv.B[C];
          const int ncols = lv.cell_size[C];
          std::vector<std::pair<int, Eigen::MatrixXd>> parts;  // (row0, block)
          int total_rows = 0;
          for (int e = 0; e < 4; ++e) {
            int side = cell_side_of_edge(e);
            for (int id : mesh.coarse_edge_ifaces(l, CX, CY, e)) {
              const InterfaceProjection& p = d.proj[id];
              if (p.n_slow == 0) continue;
              const IfaceInfo& info = mesh.ifaces[id];
              int fc = info.cell[side];
              Eigen::MatrixXd T = traces.Xe[fc][info.edge_of[side]] *
                                  E[C].middleRows(off[C][fc],
                                                  d.basis[fc].n_retained());
              if (p.boundary) T = restrict_rows(p, T);
              Eigen::MatrixXd Cf = p.lu.solve(T).topRows(p.n_slow);
              if (!p.boundary && side == 0) Cf = -Cf;
              parts.emplace_back(lv.rows.offset_of[id], std::move(Cf));
              total_rows += p.n_slow;
            }
          }
          blk.rows.reserve(total_rows);
          blk.A.resize(total_rows, ncols);
          int r = 0;
          for (auto& [row0, part] : parts) {
            for (int j = 0; j < part.rows(); ++j) blk.rows.push_back(row0 + j);
            blk.A.middleRows(r, part.rows()) = part;
            r += static_cast<int>(part.rows());
          }
        }
      }
    }
  }

  // ---- Coarsest dense inverse --------------------------------------------
  f.coarse = dense_assemble(f, L);
  if (f.coarse.rows() > 0) {
    f.coarse_lu.compute(f.coarse);
    if (f.coarse_lu.rcond() < 1e-14)
      throw CoarseSingular("factorize: coarsest-level block numerically singular");
  }

  f.dimF.resize(L + 1);
  f.dimG.assign(L + 1, 0);
  for (int l = 0; l <= L; ++l) f.dimF[l] = f.levels[l].ncoef;
  for (int l = 1; l <= L; ++l) f.dimG[l] = f.dimF[l - 1] - f.dimF[l];
  return f;
}

namespace {

Eigen::VectorXd apply_B(const LevelOps& lv, const Eigen::VectorXd& coef,
                        std::uint64_t* flops) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(lv.rows.rows);
  for (size_t c = 0; c < lv.B.size(); ++c) {
    const BBlock& blk = lv.B[c];
    if (blk.A.size() == 0) continue;
    Eigen::VectorXd x = coef.segment(lv.cell_offset[c], lv.cell_size[c]);
    Eigen::VectorXd yb = blk.A * x;
    if (flops) *flops += 2ull * blk.A.rows() * blk.A.cols();
    for (size_t r = 0; r < blk.rows.size(); ++r) y[blk.rows[r]] += yb[r];
  }
  return y;
}

Eigen::VectorXd solve_level(const Factorization& f, int l,
                            const Eigen::VectorXd& v, std::uint64_t* flops) {
  if (l == f.L) {
    if (f.coarse.rows() == 0) return Eigen::VectorXd();
    if (flops) *flops += 2ull * f.coarse.rows() * f.coarse.rows();
    return f.coarse_lu.solve(v);
  }
  const TransferOps& tr = f.transfer[l];
  const LevelOps& cur = f.levels[l];
  const LevelOps& next = f.levels[l + 1];

  // f2 = Q Rcheck v (level-l coefficients of the G^(l+1) component)
  Eigen::VectorXd f2 = Eigen::VectorXd::Zero(cur.ncoef);
  for (size_t c = 0; c < tr.Q.size(); ++c) {
    const auto& rr = tr.removed_rows[c];
    if (rr.empty() || tr.Q[c].size() == 0) continue;
    Eigen::VectorXd w(rr.size());
    for (size_t j = 0; j < rr.size(); ++j) w[j] = v[rr[j]];
    Eigen::VectorXd y = tr.Q[c] * w;
    if (flops) *flops += 2ull * tr.Q[c].rows() * tr.Q[c].cols();
    const auto& idx = tr.child_coef[c];
    for (size_t j = 0; j < idx.size(); ++j) f2[idx[j]] += y[j];
  }

  // v_next = R (v - B_l f2)
  Eigen::VectorXd t = apply_B(cur, f2, flops);
  Eigen::VectorXd vnext(next.rows.rows);
  for (int r = 0; r < next.rows.rows; ++r) vnext[r] = v[tr.R[r]] - t[tr.R[r]];

  Eigen::VectorXd x1 = solve_level(f, l + 1, vnext, flops);

  // x = P x1 + f2
  Eigen::VectorXd x = f2;
  for (size_t c = 0; c < tr.P.size(); ++c) {
    if (tr.P[c].size() == 0) continue;
    Eigen::VectorXd xc = x1.segment(next.cell_offset[c], next.cell_size[c]);
    Eigen::VectorXd y = tr.P[c] * xc;
    if (flops) *flops += 2ull * tr.P[c].rows() * tr.P[c].cols();
    const auto& idx = tr.child_coef[c];
    for (size_t j = 0; j < idx.size(); ++j) x[idx[j]] += y[j];
  }
  return x;
}

}  // namespace

Eigen::VectorXd apply_inverse(const Factorization& f, const Eigen::VectorXd& v,
                              std::uint64_t* flops) {
  if (v.size() != f.levels[0].rows.rows)
    throw ConfigError("apply_inverse: rhs dimension mismatch");
  return solve_level(f, 0, v, flops);
}

Eigen::MatrixXd dense_assemble(const Factorization& f, int l) {
  const LevelOps& lv = f.levels[l];
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(lv.rows.rows, lv.ncoef);
  for (size_t c = 0; c < lv.B.size(); ++c) {
    const BBlock& blk = lv.B[c];
    for (size_t r = 0; r < blk.rows.size(); ++r)
      A.row(blk.rows[r]).segment(lv.cell_offset[c], lv.cell_size[c]) +=
          blk.A.row(r);
  }
  return A;
}

DenseInverse dense_oracle_inverse(const Factorization& f) {
  if (f.levels[0].ncoef > 20000)
    throw SizeGuard("dense_oracle_inverse: |F^(0)| exceeds the 20000 guard");
  DenseInverse di;
  di.lu.compute(dense_assemble(f, 0));
  return di;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
std::int64_t get_i64(std::istream& is) {
  std::int64_t v;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
void put_ivec(std::ostream& os, const std::vector<int>& v) {
  put_i64(os, static_cast<std::int64_t>(v.size()));
  for (int x : v) put_i64(os, x);
}
std::vector<int> get_ivec(std::istream& is) {
  std::vector<int> v(get_i64(is));
  for (auto& x : v) x = static_cast<int>(get_i64(is));
  return v;
}
void put_mat(std::ostream& os, const Eigen::MatrixXd& m) {
  put_i64(os, m.rows());
  put_i64(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * m.size()));
}
Eigen::MatrixXd get_mat(std::istream& is) {
  std::int64_t r = get_i64(is), c = get_i64(is);
  Eigen::MatrixXd m(r, c);
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  return m;
}

}  // namespace

void save_factorization(const Factorization& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("save_factorization: cannot open " + path);
  os.write("RSMF", 4);
  put_u32(os, 1);  // version
  put_u32(os, static_cast<std::uint32_t>(f.L));
  // dimension table header
  put_i64(os, static_cast<std::int64_t>(f.dimF.size()));
  for (long long x : f.dimF) put_i64(os, x);
  for (long long x : f.dimG) put_i64(os, x);

  for (const auto& lv : f.levels) {
    put_u32(os, static_cast<std::uint32_t>(lv.level));
    put_ivec(os, lv.rows.ifaces);
    put_ivec(os, lv.rows.offset);
    put_ivec(os, lv.rows.count);
    put_ivec(os, lv.rows.offset_of);
    put_i64(os, lv.rows.rows);
    put_i64(os, lv.rows.n_boundary_ifaces);
    put_ivec(os, lv.cell_offset);
    put_ivec(os, lv.cell_size);
    put_i64(os, static_cast<std::int64_t>(lv.slots.size()));
    for (const auto& sl : lv.slots) {
      put_i64(os, static_cast<std::int64_t>(sl.size()));
      for (const auto& s : sl) {
        put_i64(os, s.iface);
        put_i64(os, s.side);
        put_i64(os, s.count);
      }
    }
    put_i64(os, lv.ncoef);
    put_i64(os, static_cast<std::int64_t>(lv.B.size()));
    for (const auto& blk : lv.B) {
      put_ivec(os, blk.rows);
      put_mat(os, blk.A);
    }
  }
  for (const auto& tr : f.transfer) {
    put_ivec(os, tr.R);
    put_i64(os, static_cast<std::int64_t>(tr.removed_rows.size()));
    for (const auto& v : tr.removed_rows) put_ivec(os, v);
    for (const auto& v : tr.child_coef) put_ivec(os, v);
    for (const auto& m : tr.P) put_mat(os, m);
    for (const auto& m : tr.Q) put_mat(os, m);
  }
  put_mat(os, f.coarse);
  put_i64(os, static_cast<std::int64_t>(f.E0.size()));
  for (const auto& m : f.E0) put_mat(os, m);
  if (!os) throw ConfigError("save_factorization: write failed for " + path);
}

Factorization load_factorization(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_factorization: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "RSMF", 4) != 0)
    throw ConfigError("load_factorization: bad magic in " + path);
  std::uint32_t version = get_u32(is);
  if (version != 1)
    throw ConfigError("load_factorization: unsupported version");

  Factorization f;
  f.L = static_cast<int>(get_u32(is));
  std::int64_t ndim = get_i64(is);
  f.dimF.resize(ndim);
  f.dimG.resize(ndim);
  for (auto& x : f.dimF) x = get_i64(is);
  for (auto& x : f.dimG) x = get_i64(is);

  f.levels.resize(f.L + 1);
  for (auto& lv : f.levels) {
    lv.level = static_cast<int>(get_u32(is));
    lv.rows.ifaces = get_ivec(is);
    lv.rows.offset = get_ivec(is);
    lv.rows.count = get_ivec(is);
    lv.rows.offset_of = get_ivec(is);
    lv.rows.rows = static_cast<int>(get_i64(is));
    lv.rows.n_boundary_ifaces = static_cast<int>(get_i64(is));
    lv.cell_offset = get_ivec(is);
    lv.cell_size = get_ivec(is);
    lv.slots.resize(get_i64(is));
    for (auto& sl : lv.slots) {
      sl.resize(get_i64(is));
      for (auto& s : sl) {
        s.iface = static_cast<int>(get_i64(is));
        s.side = static_cast<int>(get_i64(is));
        s.count = static_cast<int>(get_i64(is));
      }
    }
    lv.ncoef = static_cast<int>(get_i64(is));
    lv.B.resize(get_i64(is));
    for (auto& blk : lv.B) {
      blk.rows = get_ivec(is);
      blk.A = get_mat(is);
    }
  }
  f.transfer.resize(f.L);
  for (auto& tr : f.transfer) {
    tr.R = get_ivec(is);
    std::int64_t n = get_i64(is);
    tr.removed_rows.resize(n);
    tr.child_coef.resize(n);
    tr.P.resize(n);
    tr.Q.resize(n);
    for (auto& v : tr.removed_rows) v = get_ivec(is);
    for (auto& v : tr.child_coef) v = get_ivec(is);
    for (auto& m : tr.P) m = get_mat(is);
    for (auto& m : tr.Q) m = get_mat(is);
  }
  f.coarse = get_mat(is);
  if (f.coarse.rows() > 0) f.coarse_lu.compute(f.coarse);
  f.E0.resize(get_i64(is));
  for (auto& m : f.E0) m = get_mat(is);
  if (!is) throw ConfigError("load_factorization: truncated file " + path);
  return f;
}

}  // namespace rte

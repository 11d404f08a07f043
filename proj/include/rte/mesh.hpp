// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <vector>

namespace rte {

// Edge indices of a cell, also used as anchor identifiers.
enum Edge { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

// One fine interface (a cell edge of the fine grid).
//
// Vertical interfaces sit on lines x = line*h and are indexed
// id = line*I + seg (seg along y). Horizontal interfaces sit on lines
// y = line*h with id = (I+1)*I + line*I + seg (seg along x).
// Side 0 is the left (vertical) / bottom (horizontal) cell, side 1 the
// right / top cell; -1 when on the domain boundary. The jump sign
// convention repo-wide is [f] = side1 trace - side0 trace.
struct IfaceInfo {
  bool vertical = true;
  int line = 0, seg = 0;
  bool boundary = false;
  int cell[2] = {-1, -1};     // fine cell ids, side 0 / side 1
  int edge_of[2] = {-1, -1};  // which edge of cell[side] this interface is
  double mx = 0, my = 0;      // midpoint
};

// Dyadic hierarchy of the uniform I x I grid over [0,1]^2 with L+1 levels.
// Coarse interfaces are ordered sets of constituent fine interfaces; all
// evaluations and projections happen at fine-interface midpoints.
struct MeshHierarchy {
  int I = 0;   // fine cells per axis
  int L = 0;   // coarsening levels
  int IL = 0;  // cells per axis at the coarsest level, I / 2^L
  double h = 0;

  std::vector<IfaceInfo> ifaces;     // all fine interfaces by id
  std::vector<int> boundary_ifaces;  // ids ascending

  // interior_at[l]: fine interfaces on level-l interior grid lines, ids
  // ascending; removed_at[l] (l >= 1): interior_at[l-1] \ interior_at[l].
  std::vector<std::vector<int>> interior_at;
  std::vector<std::vector<int>> removed_at;

  int n_ifaces() const { return static_cast<int>(ifaces.size()); }
  int cells_per_axis(int l) const { return I >> l; }
  int n_cells(int l) const { return cells_per_axis(l) * cells_per_axis(l); }

  int vertical_id(int line, int seg) const { return line * I + seg; }
  int horizontal_id(int line, int seg) const { return (I + 1) * I + line * I + seg; }
  int cell_id(int cx, int cy) const { return cy * I + cx; }

  // Fine interface id of edge e of fine cell (cx, cy).
  int cell_edge_iface(int cx, int cy, int e) const {
    switch (e) {
      case kLeft: return vertical_id(cx, cy);
      case kRight: return vertical_id(cx + 1, cy);
      case kBottom: return horizontal_id(cy, cx);
      default: return horizontal_id(cy + 1, cx);
    }
  }

  // Constituent fine interfaces of edge e of level-l cell (CX, CY), ordered
  // by ascending fine id (= ascending segment index).
  std::vector<int> coarse_edge_ifaces(int l, int CX, int CY, int e) const;

  // Fine interfaces removed inside level-l cell (CX, CY) when coarsening
  // from level l-1 (the interior cross), ids ascending.
  std::vector<int> removed_inside(int l, int CX, int CY) const;

  // Fine cells covered by level-l cell (CX, CY), row-major, ids ascending.
  std::vector<int> fine_cells_of(int l, int CX, int CY) const;
};

MeshHierarchy build_hierarchy(int I, int L);

}  // namespace rte

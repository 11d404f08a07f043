// SPDX-License-Identifier: MIT
#include "rte/mesh.hpp"

#include <algorithm>

#include "rte/errors.hpp"

namespace rte {

std::vector<int> MeshHierarchy::coarse_edge_ifaces(int l, int CX, int CY,
                                                   int e) const {
  const int w = 1 << l;  // fine cells per coarse cell side
  std::vector<int> out;
  out.reserve(w);
  if (e == kLeft || e == kRight) {
    int line = (e == kLeft) ? CX * w : (CX + 1) * w;
    for (int seg = CY * w; seg < (CY + 1) * w; ++seg)
      out.push_back(vertical_id(line, seg));
  } else {
    int line = (e == kBottom) ? CY * w : (CY + 1) * w;
    for (int seg = CX * w; seg < (CX + 1) * w; ++seg)
      out.push_back(horizontal_id(line, seg));
  }
  return out;
}

std::vector<int> MeshHierarchy::removed_inside(int l, int CX, int CY) const {
  // Level-(l-1) lines strictly inside the level-l cell: one vertical and one
  // horizontal line through the cell center.
  const int w = 1 << l;
  const int half = w / 2;
  std::vector<int> out;
  out.reserve(2 * w);
  int vline = CX * w + half;
  for (int seg = CY * w; seg < (CY + 1) * w; ++seg)
    out.push_back(vertical_id(vline, seg));
  int hline = CY * w + half;
  for (int seg = CX * w; seg < (CX + 1) * w; ++seg)
    out.push_back(horizontal_id(hline, seg));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> MeshHierarchy::fine_cells_of(int l, int CX, int CY) const {
  const int w = 1 << l;
  std::vector<int> out;
  out.reserve(w * w);
  for (int cy = CY * w; cy < (CY + 1) * w; ++cy)
    for (int cx = CX * w; cx < (CX + 1) * w; ++cx) out.push_back(cell_id(cx, cy));
  return out;
}

MeshHierarchy build_hierarchy(int I, int L) {
  if (I < 1 || L < 0) throw ConfigError("build_hierarchy: I >= 1, L >= 0 required");
  if (I % (1 << L) != 0)
    throw ConfigError("build_hierarchy: I must be divisible by 2^L");
  MeshHierarchy m;
  m.I = I;
  m.L = L;
  m.IL = I >> L;
  if (m.IL < 1 || m.IL > 4)
    throw ConfigError("build_hierarchy: coarsest level must have at most 4 cells per axis");
  m.h = 1.0 / I;

  m.ifaces.resize((I + 1) * I * 2);
  for (int line = 0; line <= I; ++line) {
    for (int seg = 0; seg < I; ++seg) {
      // vertical interface on x = line*h, y in [seg*h, (seg+1)*h]
      IfaceInfo v;
      v.vertical = true;
      v.line = line;
      v.seg = seg;
      v.boundary = (line == 0 || line == I);
      v.cell[0] = (line > 0) ? m.cell_id(line - 1, seg) : -1;
      v.cell[1] = (line < I) ? m.cell_id(line, seg) : -1;
      v.edge_of[0] = kRight;
      v.edge_of[1] = kLeft;
      v.mx = line * m.h;
      v.my = (seg + 0.5) * m.h;
      m.ifaces[m.vertical_id(line, seg)] = v;

      // horizontal interface on y = line*h, x in [seg*h, (seg+1)*h]
      IfaceInfo hi;
      hi.vertical = false;
      hi.line = line;
      hi.seg = seg;
      hi.boundary = (line == 0 || line == I);
      hi.cell[0] = (line > 0) ? m.cell_id(seg, line - 1) : -1;
      hi.cell[1] = (line < I) ? m.cell_id(seg, line) : -1;
      hi.edge_of[0] = kTop;
      hi.edge_of[1] = kBottom;
      hi.mx = (seg + 0.5) * m.h;
      hi.my = line * m.h;
      m.ifaces[m.horizontal_id(line, seg)] = hi;
    }
  }

  for (int id = 0; id < m.n_ifaces(); ++id)
    if (m.ifaces[id].boundary) m.boundary_ifaces.push_back(id);

  m.interior_at.resize(L + 1);
  for (int l = 0; l <= L; ++l) {
    const int step = 1 << l;
    for (int id = 0; id < m.n_ifaces(); ++id) {
      const IfaceInfo& f = m.ifaces[id];
      if (f.boundary) continue;
      if (f.line % step == 0) m.interior_at[l].push_back(id);
    }
  }
  m.removed_at.resize(L + 1);
  for (int l = 1; l <= L; ++l) {
    std::set_difference(m.interior_at[l - 1].begin(), m.interior_at[l - 1].end(),
                        m.interior_at[l].begin(), m.interior_at[l].end(),
                        std::back_inserter(m.removed_at[l]));
  }
  return m;
}

}  // namespace rte

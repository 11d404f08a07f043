// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <rte/errors.hpp>
#include <rte/mesh.hpp>

using namespace rte;

TEST_CASE("interface counts and ids for I=4") {
  MeshHierarchy m = build_hierarchy(4, 0);
  CHECK(m.n_ifaces() == 2 * 5 * 4);  // 20 vertical + 20 horizontal
  CHECK(m.boundary_ifaces.size() == 16);
  CHECK(m.interior_at.size() == 1);
  CHECK(m.interior_at[0].size() == 24);

  // id formulas
  CHECK(m.vertical_id(2, 3) == 11);
  CHECK(m.horizontal_id(0, 0) == 20);
  CHECK(m.cell_id(1, 2) == 9);

  // edge/interface consistency: each interface lists the cells that list it
  for (int cy = 0; cy < 4; ++cy)
    for (int cx = 0; cx < 4; ++cx)
      for (int e = 0; e < 4; ++e) {
        int id = m.cell_edge_iface(cx, cy, e);
        const IfaceInfo& f = m.ifaces[id];
        int side = (e == kLeft || e == kBottom) ? 1 : 0;
        CHECK(f.cell[side] == m.cell_id(cx, cy));
        CHECK(f.edge_of[side] == e);
      }

  // midpoints lie on the expected grid lines
  const IfaceInfo& v = m.ifaces[m.vertical_id(1, 2)];
  CHECK(v.vertical);
  CHECK(v.mx == doctest::Approx(0.25));
  CHECK(v.my == doctest::Approx(0.625));
}

TEST_CASE("hierarchy levels for I=8, L=2") {
  MeshHierarchy m = build_hierarchy(8, 2);
  CHECK(m.IL == 2);
  REQUIRE(m.interior_at.size() == 3);
  REQUIRE(m.removed_at.size() == 3);
  // interior interface count at level l: 2 * (I/2^l - 1) * I
  CHECK(m.interior_at[0].size() == 2u * 7 * 8);
  CHECK(m.interior_at[1].size() == 2u * 3 * 8);
  CHECK(m.interior_at[2].size() == 2u * 1 * 8);
  CHECK(m.removed_at[1].size() ==
        m.interior_at[0].size() - m.interior_at[1].size());
  CHECK(m.removed_at[2].size() ==
        m.interior_at[1].size() - m.interior_at[2].size());

  // removed_inside of a level-1 cell is its interior cross: 2+2 fine ifaces
  auto rm = m.removed_inside(1, 0, 0);
  CHECK(rm.size() == 4);
  for (size_t i = 1; i < rm.size(); ++i) CHECK(rm[i - 1] < rm[i]);

  // coarse edge = 2^l constituent fine interfaces, ascending
  auto edge = m.coarse_edge_ifaces(2, 0, 1, kTop);
  CHECK(edge.size() == 4);
  for (size_t i = 1; i < edge.size(); ++i) CHECK(edge[i - 1] < edge[i]);
  for (int id : edge) CHECK(m.ifaces[id].boundary);

  // fine cells of a level-2 cell
  auto fc = m.fine_cells_of(2, 1, 0);
  CHECK(fc.size() == 16);
  CHECK(fc.front() == m.cell_id(4, 0));
  CHECK(fc.back() == m.cell_id(7, 3));
}

TEST_CASE("build_hierarchy validation") {
  CHECK_THROWS_AS(build_hierarchy(0, 0), ConfigError);
  CHECK_THROWS_AS(build_hierarchy(7, 1), ConfigError);   // not divisible by 2
  CHECK_THROWS_AS(build_hierarchy(32, 1), ConfigError);  // coarsest 16 > 4
  CHECK_NOTHROW(build_hierarchy(32, 3));
}

// SPDX-License-Identifier: MIT
#include "rte/oracle.hpp"

#include "rte/errors.hpp"

namespace rte {

namespace {

void check_guard(const Discretization& d) {
  if (d.delta != 0.0)
    throw ConfigError("full-order reference requires delta = 0");
  if (d.mesh.I > 16 || d.quad.M > 3)
    throw SizeGuard("full-order reference guarded at I <= 16, M <= 3");
  for (const CellBasis& b : d.basis)
    if (b.n_retained() != b.n_modes)
      throw ConfigError("full-order reference: not all modes retained");
}

}  // namespace

FullOrderSystem build_full_order_system(const Discretization& d) {
  check_guard(d);
  const int nm = d.basis[0].n_modes;  // 8M
  const int M2 = d.n_dir() / 2;       // 2M

  FullOrderSystem sys;
  sys.n = nm * d.n_cells();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sys.n, sys.n);

  auto mode_traces = [&](int cell, int e) {
    const CellBasis& b = d.basis[cell];
    Eigen::MatrixXd T(d.n_dir(), nm);
    for (int k = 0; k < nm; ++k) T.col(k) = b.edge_factor(e, k) * b.xi.col(k);
    return T;
  };

  int r = 0;
  for (int id : d.mesh.boundary_ifaces) {
    const IfaceInfo& info = d.mesh.ifaces[id];
    const InterfaceProjection& p = d.proj[id];
    int side = info.cell[0] >= 0 ? 0 : 1;
    int c = info.cell[side];
    Eigen::MatrixXd T = mode_traces(c, info.edge_of[side]);
    for (int j = 0; j < M2; ++j)
      A.row(r + j).segment(c * nm, nm) = T.row(p.rows[j]);
    r += M2;
  }
  for (int id : d.mesh.interior_at[0]) {
    const IfaceInfo& info = d.mesh.ifaces[id];
    int c0 = info.cell[0], c1 = info.cell[1];
    A.block(r, c1 * nm, d.n_dir(), nm) = mode_traces(c1, info.edge_of[1]);
    A.block(r, c0 * nm, d.n_dir(), nm) = -mode_traces(c0, info.edge_of[0]);
    r += d.n_dir();
  }
  if (r != sys.n)
    throw ConfigError("full-order reference: system not square");
  sys.lu.compute(A);
  return sys;
}

namespace {

// RHS of the dense system for particular constants v and boundary data.
Eigen::VectorXd full_order_rhs(const Discretization& d,
                               const Eigen::MatrixXd& v,
                               const std::vector<Eigen::VectorXd>& boundary) {
  const int M2 = d.n_dir() / 2;
  const int n =
      M2 * static_cast<int>(d.mesh.boundary_ifaces.size()) +
      d.n_dir() * static_cast<int>(d.mesh.interior_at[0].size());
  Eigen::VectorXd rhs(n);
  int r = 0;
  for (size_t bi = 0; bi < d.mesh.boundary_ifaces.size(); ++bi) {
    int id = d.mesh.boundary_ifaces[bi];
    const IfaceInfo& info = d.mesh.ifaces[id];
    const InterfaceProjection& p = d.proj[id];
    int side = info.cell[0] >= 0 ? 0 : 1;
    rhs.segment(r, M2) =
        boundary[bi] - p.restrict_incoming(v.col(info.cell[side]));
    r += M2;
  }
  for (int id : d.mesh.interior_at[0]) {
    const IfaceInfo& info = d.mesh.ifaces[id];
    rhs.segment(r, d.n_dir()) = v.col(info.cell[0]) - v.col(info.cell[1]);
    r += d.n_dir();
  }
  return rhs;
}

}  // namespace

SolutionField full_order_steady_solve(const Discretization& d,
                                      const FullOrderSystem& sys,
                                      const SteadyProblem& p) {
  SolutionField out = zero_field(d);
  out.v = solve_particular(d, p.rhs);
  Eigen::VectorXd coef = sys.lu.solve(full_order_rhs(d, out.v, p.boundary));
  const int nm = d.basis[0].n_modes;
  for (int c = 0; c < d.n_cells(); ++c)
    out.slow[c] = coef.segment(c * nm, nm);
  return out;
}

FundamentalSolver make_full_order_solver(const Discretization& d,
                                         const FullOrderSystem& sys) {
  return [&d, &sys](const Eigen::MatrixXd& v,
                    const std::vector<Eigen::VectorXd>& boundary,
                    SolutionField& out) {
    Eigen::VectorXd coef = sys.lu.solve(full_order_rhs(d, v, boundary));
    const int nm = d.basis[0].n_modes;
    for (int c = 0; c < d.n_cells(); ++c)
      out.slow[c] = coef.segment(c * nm, nm);
  };
}

TimeSeriesResult full_order_time_series(const Discretization& d,
                                        const FullOrderSystem& sys,
                                        const PointFunc& initial,
                                        const PointFunc& boundary,
                                        const PointFunc& source,
                                        const TimeSteppingConfig& cfg) {
  check_guard(d);
  return run_time_series(d, make_full_order_solver(d, sys), initial, boundary,
                         source, cfg);
}

}  // namespace rte

// SPDX-License-Identifier: MIT
#include "rte/projection.hpp"

#include <cmath>

#include "rte/errors.hpp"

namespace rte {

Eigen::VectorXd InterfaceProjection::project(const Eigen::VectorXd& l) const {
  if (n_slow == 0) return Eigen::VectorXd();
  return expand(l).head(n_slow);
}

Eigen::VectorXd InterfaceProjection::expand(const Eigen::VectorXd& l) const {
  if (l.size() != dim)
    throw ConfigError("project: vector dimension mismatch");
  return lu.solve(l);
}

Eigen::VectorXd InterfaceProjection::restrict_incoming(
    const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) out[r] = full[rows[r]];
  return out;
}

InterfaceProjection build_projection(const IfaceInfo& info, int iface_id,
                                     const CellBasis* cell0,
                                     const CellBasis* cell1,
                                     const QuadratureSet& quad) {
  InterfaceProjection p;
  p.iface = iface_id;
  p.boundary = info.boundary;
  const int n = quad.n_dir;
  const int M = quad.M;

  if (p.boundary) {
    // Incoming half-space: outward normal n, keep directions with n.u < 0.
    p.rows.reserve(2 * M);
    for (int m = 0; m < n; ++m) {
      double nu;
      if (info.vertical)
        nu = (info.line == 0) ? -quad.c[m] : quad.c[m];
      else
        nu = (info.line == 0) ? -quad.s[m] : quad.s[m];
      if (nu < 0) p.rows.push_back(m);
    }
    p.dim = static_cast<int>(p.rows.size());
  } else {
    p.dim = n;
  }

  // Gather anchored modes: side 0 then side 1, retained (slow) and
  // discarded (fast) separately, ascending mode index within each group.
  const CellBasis* cells[2] = {cell0, cell1};
  std::vector<std::pair<int, int>> slow_src, fast_src;
  for (int side = 0; side < 2; ++side) {
    const CellBasis* cb = cells[side];
    if (!cb) continue;
    int edge = info.edge_of[side];
    for (int k : cb->retained_at[edge]) slow_src.emplace_back(side, k);
    if (side == 0) p.side0_slow = static_cast<int>(slow_src.size());
    for (int k : cb->fast_at[edge]) fast_src.emplace_back(side, k);
  }
  p.slow_src = slow_src;
  p.fast_src = fast_src;
  p.n_slow = static_cast<int>(slow_src.size());
  const int n_cols = p.n_slow + static_cast<int>(fast_src.size());
  if (n_cols != p.dim)
    throw RankDeficient("build_projection: anchored mode count != space dim");

  auto column_of = [&](std::pair<int, int> src) {
    Eigen::VectorXd xi = cells[src.first]->xi.col(src.second);
    if (!p.boundary) return xi;
    return p.restrict_incoming(xi);
  };

  p.chi.resize(p.dim, p.dim);
  // Modified Gram-Schmidt with one reorthogonalization pass on the slow
  // vectors, then rescale each to unit max-norm.
  for (int j = 0; j < p.n_slow; ++j) {
    Eigen::VectorXd v = column_of(slow_src[j]);
    double orig = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        const auto qi = p.chi.col(i);
        v -= (qi.dot(v) / qi.squaredNorm()) * qi;
      }
    }
    if (v.norm() < 1e-12 * std::max(orig, 1.0))
      throw RankDeficient("build_projection: dependent slow mode at interface " +
                          std::to_string(iface_id));
    v /= v.cwiseAbs().maxCoeff();
    p.chi.col(j) = v;
  }
  for (size_t j = 0; j < fast_src.size(); ++j)
    p.chi.col(p.n_slow + static_cast<int>(j)) = column_of(fast_src[j]);

  p.lu.compute(p.chi);
  if (p.lu.rcond() < 1e-12)
    throw RankDeficient("build_projection: interface basis near-singular at " +
                        std::to_string(iface_id));
  return p;
}

}  // namespace rte

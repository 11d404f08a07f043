// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include "rte/solver.hpp"

namespace rte {

// Dense uncompressed reference: all 8M raw basis coefficients per cell,
// glued by full (unprojected) continuity and inflow boundary rows at fine
// interface midpoints. Verification only; requires delta = 0 (every mode
// retained) and desk scale (I <= 16, M <= 3).
//
// Row order matches the compressed path: boundary interfaces ascending
// (2M incoming rows each, in the interface's incoming-direction order),
// then interior interfaces ascending (4M jump rows each, sign side1 -
// side0). Columns are cell-major, 8M modes per cell in mode order.
struct FullOrderSystem {
  int n = 0;  // 8M I^2
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

FullOrderSystem build_full_order_system(const Discretization& d);

// Dense steady solve; returns a field on d (slow = all 8M coefficients).
SolutionField full_order_steady_solve(const Discretization& d,
                                      const FullOrderSystem& sys,
                                      const SteadyProblem& p);

// FundamentalSolver backed by the dense system, for use with the shared
// midpoint steppers.
FundamentalSolver make_full_order_solver(const Discretization& d,
                                         const FullOrderSystem& sys);

// Same time marching as run_time_series, with the dense fundamental solve.
TimeSeriesResult full_order_time_series(const Discretization& d,
                                        const FullOrderSystem& sys,
                                        const PointFunc& initial,
                                        const PointFunc& boundary,
                                        const PointFunc& source,
                                        const TimeSteppingConfig& cfg);

}  // namespace rte

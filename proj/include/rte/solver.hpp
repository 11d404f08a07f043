// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "rte/discretization.hpp"
#include "rte/rsm.hpp"

namespace rte {

// Discrete solution: per-cell particular constants plus per-cell fundamental
// coefficients. `slow` is aligned with basis[c].retained, `fast` (optional
// layer correction) with basis[c].fast.
struct SolutionField {
  double t = 0;
  Eigen::MatrixXd v;                  // n_dir x n_cells
  std::vector<Eigen::VectorXd> slow;  // raw retained coefficients per cell
  std::vector<Eigen::VectorXd> fast;  // raw discarded coefficients per cell
};

SolutionField zero_field(const Discretization& d, double t = 0);

// Full angular vector at a point (contained cell chosen by floor division;
// points on shared edges use the upper cell).
Eigen::VectorXd evaluate(const Discretization& d, const SolutionField& f,
                         double x, double y);

// Value at the center of `cell`.
Eigen::VectorXd center_value(const Discretization& d, const SolutionField& f,
                             int cell);

// Exact cell average (particular constant + closed-form basis averages).
Eigen::VectorXd average_value(const Discretization& d, const SolutionField& f,
                              int cell);

// One-sided trace at the midpoint of edge e of `cell`.
Eigen::VectorXd trace_value(const Discretization& d, const SolutionField& f,
                            int cell, int e);

// Discrete norm (h / sqrt(M)) * sqrt(sum over cells/directions of centered
// values squared); the constant field 1 has norm 2.
double discrete_norm(const Discretization& d, const SolutionField& f);
double discrete_distance(const Discretization& d, const SolutionField& a,
                         const SolutionField& b);

// Source/boundary/initial data: full angular vector at (x, y) and time t.
using PointFunc =
    std::function<Eigen::VectorXd(double x, double y, double t)>;

// Steady problem data: per-cell RHS constants and incoming boundary values
// at boundary fine-interface midpoints (ordered as mesh.boundary_ifaces,
// each restricted to the interface's incoming directions).
struct SteadyProblem {
  Eigen::MatrixXd rhs;                    // n_dir x n_cells
  std::vector<Eigen::VectorXd> boundary;  // length 2M each
};

// Incoming boundary samples from a full angular function at time t.
std::vector<Eigen::VectorXd> sample_boundary(const Discretization& d,
                                             const PointFunc& psi, double t);

// Per-cell solve of (alpha I + beta A_C) v = rhs with
// A_C = (sigma_T/eps^2) I - (sigma_T/eps^2 - sigma_a) K diag(w).
// alpha = 0, beta = 1 gives the steady particular part. LUs are memoized on
// the optics/shift key.
Eigen::MatrixXd solve_particular(const Discretization& d,
                                 const Eigen::MatrixXd& rhs, double alpha = 0.0,
                                 double beta = 1.0);

// Fundamental-coefficient right-hand side for a given particular part:
// boundary rows get the projected inflow mismatch, interior rows the
// projected jump -[v].
Eigen::VectorXd steady_rhs(const Discretization& d, const Factorization& f,
                           const Eigen::MatrixXd& v,
                           const std::vector<Eigen::VectorXd>& boundary);

// Full steady solve: particular part, compressed interface solve, raw slow
// coefficients via the level-0 dual bases.
SolutionField steady_solve(const Discretization& d, const Factorization& f,
                           const SteadyProblem& p);

// Cancel the remaining interface/boundary residual of the slow+particular
// field in each interface's fast mode subspace. Overwrites f.fast.
void reconstruct_layers(const Discretization& d,
                        const std::vector<Eigen::VectorXd>& boundary,
                        SolutionField& f);

struct TimeSteppingConfig {
  double dt = 0.1;
  double T = 1.0;
  double tol = 1e-8;
  int max_iters = 5000;
  enum Mode { kCellAverage, kCellCenter } mode = kCellAverage;
  bool reconstruct = true;  // apply layer reconstruction after each step
  // Anderson extrapolation depth for the inner fixed point (0 = plain
  // relaxed iteration). The iteration map is affine, so extrapolation
  // preserves the fixed point while cutting the iteration count.
  int anderson_depth = 0;
};

struct StepDiagnostics {
  int iterations = 0;
  std::vector<double> residual_history;  // successive-iterate distances
  double final_residual = 0;
};

// Pluggable fundamental solve used by the midpoint steppers: given the
// particular constants and incoming boundary data, fill out.slow. The
// compressed path uses the multilevel factorization; the dense reference
// path substitutes a full-order solve.
using FundamentalSolver = std::function<void(
    const Eigen::MatrixXd& v, const std::vector<Eigen::VectorXd>& boundary,
    SolutionField& out)>;

FundamentalSolver make_fundamental_solver(const Discretization& d,
                                          const Factorization& fact);

// One implicit midpoint step, fixed point over cell averages with
// relaxation weight dt (requires dt < 1).
SolutionField midpoint_step_cell_average(
    const Discretization& d, const FundamentalSolver& fsolve,
    const SolutionField& prev, const PointFunc& source,
    const PointFunc& boundary, const TimeSteppingConfig& cfg,
    StepDiagnostics* diag = nullptr);

// One implicit midpoint step, explicit cell-center variant (no relaxation
// constraint; converges for small dt).
SolutionField midpoint_step_cell_center(
    const Discretization& d, const FundamentalSolver& fsolve,
    const SolutionField& prev, const PointFunc& source,
    const PointFunc& boundary, const TimeSteppingConfig& cfg,
    StepDiagnostics* diag = nullptr);

struct TimeSeriesResult {
  std::vector<SolutionField> fields;  // psi^0 .. psi^N
  std::vector<StepDiagnostics> diags;  // per step 1..N
};

// Time marching: boundary sampled at t_n, source at t_{n-1/2}; psi^0 takes
// cell-center samples of `initial` into the particular part.
TimeSeriesResult run_time_series(const Discretization& d,
                                 const FundamentalSolver& fsolve,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg);

// Convenience overload using the multilevel factorization.
TimeSeriesResult run_time_series(const Discretization& d,
                                 const Factorization& fact,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg);

}  // namespace rte

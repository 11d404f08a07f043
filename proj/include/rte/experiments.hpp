// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rte/solver.hpp"

namespace rte {

// Quadrature picked for a per-quadrant direction count M: one polar node,
// M azimuths (angular variety matters more than polar resolution in x-y
// geometry).
QuadratureSet quadrature_for(int M);

// Analytic reference solution of the semi-discrete DOM system in a constant
// isotropic medium:
//   psi = t/(1+t) (1+eps x) xi_min exp(lambda_min ((sqrt(3)/2) x + y/2)),
// with (lambda_min, xi_min) the smallest-magnitude negative eigenpair of
//   A = ((sqrt(3)/2) C + (1/2) S)^{-1} ((sigma_T/eps - eps sigma_a) W_row
//       - (sigma_T/eps) I).
struct ManufacturedCase {
  double sigma_T = 1, sigma_a = 1, eps = 1;
  QuadratureSet quad;
  KernelMatrix kernel;  // isotropic (g = 0)
  double lambda_min = 0;
  Eigen::VectorXd xi_min;
};

ManufacturedCase make_manufactured_case(double sigma_T, double sigma_a,
                                        double eps, const QuadratureSet& quad);

Eigen::VectorXd manufactured_reference(const ManufacturedCase& mc, double x,
                                       double y, double t);
Eigen::VectorXd manufactured_source(const ManufacturedCase& mc, double x,
                                    double y, double t);

// Discrete norm of per-cell angular samples: (h/sqrt(M)) sqrt(sum f^2).
double error_norm(const std::vector<Eigen::VectorXd>& cell_values, int I,
                  int M);

// Relative angular/scalar-flux errors of `f` against per-cell reference
// center values.
struct FieldError {
  double angular = 0;
  double scalar = 0;
};
FieldError field_error(const Discretization& d, const SolutionField& f,
                       const std::vector<Eigen::VectorXd>& reference);
FieldError field_error(const Discretization& d, const SolutionField& f,
                       const SolutionField& reference);

struct ConvergenceRow {
  int M = 0;
  double eps = 0, h = 0;
  double err_angular = 0, err_scalar = 0;
  double order_angular = 0, order_scalar = 0;  // vs previous (coarser) h
  int total_iterations = 0;
};

// Manufactured-solution study: dt = h, T = 1, cell_average mode. Rows are
// grouped by (M, eps) with h in the given (descending) order; orders are
// log2 ratios between consecutive h.
std::vector<ConvergenceRow> convergence_study(const std::vector<int>& Ms,
                                              const std::vector<double>& epss,
                                              const std::vector<double>& hs,
                                              double delta, double tol,
                                              int max_iters = 20000);

struct SweepRow {
  double delta = 0;
  double ratio = 0;  // rank ratio after selection
  double err_angular = 0, err_scalar = 0;
};

// Low-rank sweep against the delta = 0 pipeline on the same grid: run the
// time series once per delta and compare final fields at cell centers.
std::vector<SweepRow> rank_sweep(const MaterialField& mat, int I, int L,
                                 const QuadratureSet& quad, double g,
                                 const std::vector<double>& deltas,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg);

struct CostRow {
  int I = 0;
  std::uint64_t flops = 0;    // one apply_inverse
  std::uint64_t storage = 0;  // factorization doubles
};

// apply_inverse flop count and factorization storage over a grid sweep
// (L grows with I so the coarsest grid stays 4x4).
std::vector<CostRow> cost_scaling(const MaterialField& mat,
                                  const std::vector<int>& Is,
                                  const QuadratureSet& quad, double g,
                                  double delta);

// Least-squares slope of log(y) vs log(x).
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

// CSV with header row and 17-significant-digit values.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Zero / constant-in-angle convenience functions.
PointFunc zero_func(int n_dir);
PointFunc isotropic_func(int n_dir, const std::function<double(double, double,
                                                               double)>& s);

}  // namespace rte

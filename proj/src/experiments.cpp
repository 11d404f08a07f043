// SPDX-License-Identifier: MIT
#include "rte/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "rte/errors.hpp"

namespace rte {

QuadratureSet quadrature_for(int M) {
  return build_quadrature(1, M);
}

ManufacturedCase make_manufactured_case(double sigma_T, double sigma_a,
                                        double eps, const QuadratureSet& quad) {
  if (sigma_T <= 0 || sigma_a <= 0 || eps <= 0)
    throw ConfigError("make_manufactured_case: constants must be positive");
  ManufacturedCase mc;
  mc.sigma_T = sigma_T;
  mc.sigma_a = sigma_a;
  mc.eps = eps;
  mc.quad = quad;
  mc.kernel = discrete_kernel(quad, 0.0);

  const int n = quad.n_dir;
  Eigen::MatrixXd W(n, n);
  for (int m = 0; m < n; ++m) W.row(m) = quad.w.transpose();
  Eigen::VectorXd dir = std::sqrt(3.0) / 2.0 * quad.c + 0.5 * quad.s;
  Eigen::MatrixXd A =
      dir.cwiseInverse().asDiagonal() *
      ((sigma_T / eps - eps * sigma_a) * W -
       (sigma_T / eps) * Eigen::MatrixXd::Identity(n, n));

  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  int best = -1;
  double best_mag = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    std::complex<double> lam = es.eigenvalues()[i];
    if (std::abs(lam.imag()) > 1e-10 || lam.real() >= 0) continue;
    if (std::abs(lam.real()) < best_mag) {
      best_mag = std::abs(lam.real());
      best = i;
    }
  }
  if (best < 0)
    throw NonRealSpectrum(
        "make_manufactured_case: no real negative eigenvalue found");
  mc.lambda_min = es.eigenvalues()[best].real();
  Eigen::VectorXd xi = es.eigenvectors().col(best).real();
  int imax;
  xi.cwiseAbs().maxCoeff(&imax);
  mc.xi_min = xi / xi[imax];
  return mc;
}

Eigen::VectorXd manufactured_reference(const ManufacturedCase& mc, double x,
                                       double y, double t) {
  double e = std::exp(mc.lambda_min * (std::sqrt(3.0) / 2.0 * x + 0.5 * y));
  return (t / (1 + t) * (1 + mc.eps * x) * e) * mc.xi_min;
}

Eigen::VectorXd manufactured_source(const ManufacturedCase& mc, double x,
                                    double y, double t) {
  double e = std::exp(mc.lambda_min * (std::sqrt(3.0) / 2.0 * x + 0.5 * y));
  Eigen::VectorXd q =
      (1.0 / ((1 + t) * (1 + t)) * (1 + mc.eps * x)) * mc.xi_min +
      (t / (1 + t)) * mc.quad.c.cwiseProduct(mc.xi_min);
  return e * q;
}

double error_norm(const std::vector<Eigen::VectorXd>& cell_values, int I,
                  int M) {
  if (static_cast<int>(cell_values.size()) != I * I)
    throw ConfigError("error_norm: expected I^2 cell samples");
  double s = 0;
  for (const auto& v : cell_values) s += v.squaredNorm();
  return (1.0 / I) / std::sqrt(static_cast<double>(M)) * std::sqrt(s);
}

FieldError field_error(const Discretization& d, const SolutionField& f,
                       const std::vector<Eigen::VectorXd>& reference) {
  double ea = 0, na = 0, es = 0, ns = 0;
  for (int c = 0; c < d.n_cells(); ++c) {
    Eigen::VectorXd val = center_value(d, f, c);
    ea += (val - reference[c]).squaredNorm();
    na += reference[c].squaredNorm();
    double phi = d.quad.w.dot(val), phir = d.quad.w.dot(reference[c]);
    es += (phi - phir) * (phi - phir);
    ns += phir * phir;
  }
  FieldError out;
  out.angular = std::sqrt(ea / na);
  out.scalar = std::sqrt(es / ns);
  return out;
}

FieldError field_error(const Discretization& d, const SolutionField& f,
                       const SolutionField& reference) {
  std::vector<Eigen::VectorXd> ref(d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c) ref[c] = center_value(d, reference, c);
  return field_error(d, f, ref);
}

namespace {

// Deepest hierarchy whose coarsest grid is 4x4 (or the input grid itself
// when I < 4).
int levels_for(int I) {
  int L = 0;
  while ((I >> L) > 4) ++L;
  return L;
}

}  // namespace

std::vector<ConvergenceRow> convergence_study(const std::vector<int>& Ms,
                                              const std::vector<double>& epss,
                                              const std::vector<double>& hs,
                                              double delta, double tol,
                                              int max_iters) {
  std::vector<ConvergenceRow> rows;
  for (int M : Ms) {
    QuadratureSet quad = quadrature_for(M);
    for (double eps : epss) {
      ManufacturedCase mc = make_manufactured_case(1.0, 0.5, eps, quad);
      double prev_ea = 0, prev_es = 0;
      bool have_prev = false;
      for (double h : hs) {
        int I = static_cast<int>(std::lround(1.0 / h));
        Discretization d = discretize(constant_field(1.0, 0.5, eps), I,
                                      levels_for(I), quad, 0.0, delta);
        Factorization fact = factorize(d);
        TimeSteppingConfig cfg;
        cfg.dt = h;
        cfg.T = 1.0;
        cfg.tol = tol;
        cfg.max_iters = max_iters;
        cfg.mode = TimeSteppingConfig::kCellAverage;
        cfg.anderson_depth = 40;
        auto ref_fn = [&mc](double x, double y, double t) {
          return manufactured_reference(mc, x, y, t);
        };
        auto src_fn = [&mc](double x, double y, double t) {
          return manufactured_source(mc, x, y, t);
        };
        TimeSeriesResult ts =
            run_time_series(d, fact, ref_fn, ref_fn, src_fn, cfg);

        std::vector<Eigen::VectorXd> exact(d.n_cells());
        for (int c = 0; c < d.n_cells(); ++c) {
          double x = (c % I + 0.5) * h, y = (c / I + 0.5) * h;
          exact[c] = manufactured_reference(mc, x, y, cfg.T);
        }
        FieldError fe = field_error(d, ts.fields.back(), exact);

        ConvergenceRow row;
        row.M = M;
        row.eps = eps;
        row.h = h;
        row.err_angular = fe.angular;
        row.err_scalar = fe.scalar;
        for (const auto& dg : ts.diags) row.total_iterations += dg.iterations;
        if (have_prev) {
          row.order_angular = std::log2(prev_ea / fe.angular);
          row.order_scalar = std::log2(prev_es / fe.scalar);
        }
        prev_ea = fe.angular;
        prev_es = fe.scalar;
        have_prev = true;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<SweepRow> rank_sweep(const MaterialField& mat, int I, int L,
                                 const QuadratureSet& quad, double g,
                                 const std::vector<double>& deltas,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg) {
  Discretization dref = discretize(mat, I, L, quad, g, 0.0);
  Factorization fref = factorize(dref);
  TimeSeriesResult ref =
      run_time_series(dref, fref, initial, boundary, source, cfg);
  std::vector<Eigen::VectorXd> refv(dref.n_cells());
  for (int c = 0; c < dref.n_cells(); ++c)
    refv[c] = center_value(dref, ref.fields.back(), c);

  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    Discretization d = discretize(mat, I, L, quad, g, delta);
    Factorization fact = factorize(d);
    TimeSeriesResult ts =
        run_time_series(d, fact, initial, boundary, source, cfg);
    SweepRow row;
    row.delta = delta;
    row.ratio = rank_ratio(d.basis);
    FieldError fe = field_error(d, ts.fields.back(), refv);
    row.err_angular = fe.angular;
    row.err_scalar = fe.scalar;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CostRow> cost_scaling(const MaterialField& mat,
                                  const std::vector<int>& Is,
                                  const QuadratureSet& quad, double g,
                                  double delta) {
  std::vector<CostRow> rows;
  for (int I : Is) {
    Discretization d = discretize(mat, I, levels_for(I), quad, g, delta);
    Factorization fact = factorize(d);
    Eigen::VectorXd v(fact.levels[0].rows.rows);
    for (int i = 0; i < v.size(); ++i)
      v[i] = std::sin(0.37 * i + 1.0);  // fixed dense test vector
    CostRow row;
    row.I = I;
    std::uint64_t flops = 0;
    apply_inverse(fact, v, &flops);
    row.flops = flops;
    row.storage = fact.storage_doubles();
    rows.push_back(row);
  }
  return rows;
}

double fit_exponent(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("fit_exponent: need matching lists of length >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_csv: cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  os.precision(17);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  if (!os) throw ConfigError("write_csv: write failed for " + path);
}

PointFunc zero_func(int n_dir) {
  return [n_dir](double, double, double) {
    return Eigen::VectorXd::Zero(n_dir).eval();
  };
}

PointFunc isotropic_func(
    int n_dir, const std::function<double(double, double, double)>& s) {
  return [n_dir, s](double x, double y, double t) {
    return (s(x, y, t) * Eigen::VectorXd::Ones(n_dir)).eval();
  };
}

}  // namespace rte

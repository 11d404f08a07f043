// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <random>
#include <rte/errors.hpp>
#include <rte/experiments.hpp>
#include <rte/oracle.hpp>
#include <rte/solver.hpp>

using namespace rte;

namespace {

Discretization make_disc(int I, int L, double eps, double delta, int M = 1) {
  QuadratureSet quad = build_quadrature(1, M);
  return discretize(constant_field(1.0, 0.5, eps), I, L, quad, 0.0, delta);
}

}  // namespace

TEST_CASE("solve_particular: trivial, isotropic, residual") {
  Discretization d = make_disc(4, 1, 0.25, 0.0);
  int n = d.n_dir();
  // zero rhs -> zero
  CHECK(solve_particular(d, Eigen::MatrixXd::Zero(n, d.n_cells())).norm() ==
        0.0);
  // isotropic rhs q*1 -> (q / sigma_a) * 1
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Ones(n, d.n_cells()) * 3.0;
  Eigen::MatrixXd v = solve_particular(d, rhs);
  CHECK((v.array() - 3.0 / 0.5).abs().maxCoeff() < 1e-12);
  // random rhs: check A_C v = rhs directly
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  for (int c = 0; c < d.n_cells(); ++c)
    for (int m = 0; m < n; ++m) rhs(m, c) = N(rng);
  v = solve_particular(d, rhs);
  for (int c = 0; c < d.n_cells(); ++c) {
    const CellOptics& o = d.optics[c];
    double a1 = o.sigma_T_bar / (o.epsilon_bar * o.epsilon_bar);
    Eigen::VectorXd Av =
        a1 * v.col(c) -
        (a1 - o.sigma_a_bar) * (d.kernel.kappa * (d.quad.w.cwiseProduct(v.col(c))));
    CHECK((Av - rhs.col(c)).norm() < 1e-12 * rhs.col(c).norm() * a1);
  }
  // shifted solve (alpha I + beta A) v = rhs on the isotropic eigenvector
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, d.n_cells());
  Eigen::MatrixXd vs = solve_particular(d, ones, 2.0, 0.5);
  CHECK((vs.array() - 1.0 / (2.0 + 0.5 * 0.5)).abs().maxCoeff() < 1e-13);
}

TEST_CASE("constant equilibrium is reproduced exactly") {
  // With isotropic boundary data psi = a and source q = sigma_a * a, the
  // steady solution is the constant a: fundamental coefficients vanish.
  Discretization d = make_disc(8, 1, 0.1, 0.0);
  Factorization f = factorize(d);
  double a = 0.7;
  SteadyProblem sp;
  sp.rhs = Eigen::MatrixXd::Ones(d.n_dir(), d.n_cells()) * (0.5 * a);
  sp.boundary = sample_boundary(
      d, [&](double, double, double) {
        return Eigen::VectorXd::Constant(d.n_dir(), a).eval();
      }, 0.0);
  SolutionField sol = steady_solve(d, f, sp);
  CHECK((sol.v.array() - a).abs().maxCoeff() < 1e-12);
  for (int c = 0; c < d.n_cells(); ++c)
    CHECK(sol.slow[c].lpNorm<Eigen::Infinity>() < 1e-12);
  // field evaluation equals the constant everywhere
  CHECK((evaluate(d, sol, 0.33, 0.71).array() - a).abs().maxCoeff() < 1e-12);
  CHECK(discrete_norm(d, sol) == doctest::Approx(2.0 * a).epsilon(1e-12));
}

TEST_CASE("steady_solve matches the full-order oracle at delta=0") {
  Discretization d = make_disc(4, 1, 0.5, 0.0);
  Factorization f = factorize(d);
  FullOrderSystem sys = build_full_order_system(d);
  std::mt19937 rng(9);
  std::normal_distribution<double> N;
  SteadyProblem sp;
  sp.rhs.resize(d.n_dir(), d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c)
    for (int m = 0; m < d.n_dir(); ++m) sp.rhs(m, c) = N(rng);
  sp.boundary = sample_boundary(
      d, [&](double x, double y, double) {
        Eigen::VectorXd b(d.n_dir());
        for (int m = 0; m < d.n_dir(); ++m)
          b[m] = std::cos(3 * x + m) * std::sin(2 * y);
        return b;
      }, 0.0);
  SolutionField a = steady_solve(d, f, sp);
  SolutionField b = full_order_steady_solve(d, sys, sp);
  double ref = 0, dist = 0;
  for (int c = 0; c < d.n_cells(); ++c) {
    double x = (c % 4 + 0.5) * d.mesh.h, y = (c / 4 + 0.5) * d.mesh.h;
    Eigen::VectorXd va = evaluate(d, a, x, y), vb = evaluate(d, b, x, y);
    dist += (va - vb).squaredNorm();
    ref += vb.squaredNorm();
  }
  CHECK(std::sqrt(dist / ref) < 1e-10);
}

TEST_CASE("reconstruct_layers cancels interface mismatch at delta=0") {
  Discretization d = make_disc(4, 1, 0.2, 0.0);
  Factorization f = factorize(d);
  SteadyProblem sp;
  sp.rhs = Eigen::MatrixXd::Ones(d.n_dir(), d.n_cells());
  sp.boundary = sample_boundary(
      d, [&](double x, double, double) {
        return Eigen::VectorXd::Constant(d.n_dir(), 1.0 + x).eval();
      }, 0.0);
  SolutionField sol = steady_solve(d, f, sp);
  SolutionField before = sol;
  reconstruct_layers(d, sp.boundary, sol);
  // with every mode retained there is nothing left for the fast space
  for (int c = 0; c < d.n_cells(); ++c)
    CHECK(sol.fast[c].lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(discrete_distance(d, before, sol) < 1e-9);
}

TEST_CASE("reconstruct_layers reduces trace mismatch when compressed") {
  Discretization d = make_disc(8, 1, 0.005, 1e-3);
  Factorization f = factorize(d);
  SteadyProblem sp;
  sp.rhs = Eigen::MatrixXd::Ones(d.n_dir(), d.n_cells());
  auto bfun = [&](double x, double y, double) {
    return Eigen::VectorXd::Constant(d.n_dir(), 1.0 + x + y * y).eval();
  };
  sp.boundary = sample_boundary(d, bfun, 0.0);
  SolutionField sol = steady_solve(d, f, sp);

  auto mismatch = [&](const SolutionField& s) {
    double acc = 0;
    for (int id : d.mesh.interior_at[0]) {
      const IfaceInfo& fc = d.mesh.ifaces[id];
      Eigen::VectorXd t0 = trace_value(d, s, fc.cell[0], fc.edge_of[0]);
      Eigen::VectorXd t1 = trace_value(d, s, fc.cell[1], fc.edge_of[1]);
      acc += (t1 - t0).squaredNorm();
    }
    return std::sqrt(acc);
  };
  double before = mismatch(sol);
  reconstruct_layers(d, sp.boundary, sol);
  double after = mismatch(sol);
  CHECK(after < before);
}

TEST_CASE("fixed point: zero data gives zero, equilibrium is stationary") {
  Discretization d = make_disc(4, 1, 0.25, 0.0);
  Factorization f = factorize(d);
  TimeSteppingConfig cfg;
  cfg.dt = 0.25;
  cfg.T = 0.5;
  cfg.tol = 1e-12;
  auto zero = zero_func(d.n_dir());
  TimeSeriesResult r = run_time_series(d, f, zero, zero, zero, cfg);
  REQUIRE(r.fields.size() == 3);
  for (const auto& fld : r.fields) CHECK(discrete_norm(d, fld) < 1e-11);

  // equilibrium: psi = a constant with q = sigma_a a, boundary a
  double a = 0.4;
  auto consta = [&](double, double, double) {
    return Eigen::VectorXd::Constant(d.n_dir(), a).eval();
  };
  auto srca = [&](double, double, double) {
    return Eigen::VectorXd::Constant(d.n_dir(), 0.5 * a).eval();
  };
  r = run_time_series(d, f, consta, consta, srca, cfg);
  for (const auto& fld : r.fields)
    CHECK((fld.v.array() - a).abs().maxCoeff() < 1e-9);
}

TEST_CASE("cell_center mode agrees with cell_average on a smooth problem") {
  Discretization d = make_disc(4, 1, 0.5, 0.0);
  Factorization f = factorize(d);
  auto bc = [&](double x, double y, double t) {
    return Eigen::VectorXd::Constant(d.n_dir(), t * (1 + x + y)).eval();
  };
  auto q = [&](double x, double y, double t) {
    return Eigen::VectorXd::Constant(d.n_dir(), x + y + t).eval();
  };
  auto zero = zero_func(d.n_dir());
  TimeSteppingConfig cfg;
  cfg.dt = 0.125;
  cfg.T = 0.25;
  cfg.tol = 1e-11;
  cfg.mode = TimeSteppingConfig::kCellAverage;
  TimeSeriesResult ra = run_time_series(d, f, zero, bc, q, cfg);
  cfg.mode = TimeSteppingConfig::kCellCenter;
  TimeSeriesResult rc = run_time_series(d, f, zero, bc, q, cfg);
  // the two fixed points differ by the cell-average vs center quadrature
  // of in-cell variation: O(h^2) agreement, not machine precision
  double dist = discrete_distance(d, ra.fields.back(), rc.fields.back());
  double ref = discrete_norm(d, ra.fields.back());
  CHECK(dist / ref < 5e-2);
}

TEST_CASE("anderson acceleration reaches the same fixed point") {
  Discretization d = make_disc(8, 1, 0.05, 1e-3);
  Factorization f = factorize(d);
  auto bc = [&](double x, double, double t) {
    return Eigen::VectorXd::Constant(d.n_dir(), t / (1 + t) * (1 + x)).eval();
  };
  auto zero = zero_func(d.n_dir());
  TimeSteppingConfig cfg;
  cfg.dt = 0.25;
  cfg.T = 0.25;
  cfg.tol = 1e-11;
  cfg.max_iters = 20000;
  cfg.anderson_depth = 0;
  TimeSeriesResult plain = run_time_series(d, f, zero, bc, zero, cfg);
  cfg.anderson_depth = 20;
  TimeSeriesResult acc = run_time_series(d, f, zero, bc, zero, cfg);
  CHECK(acc.diags[0].iterations < plain.diags[0].iterations);
  double dist = discrete_distance(d, plain.fields.back(), acc.fields.back());
  CHECK(dist / discrete_norm(d, plain.fields.back()) < 1e-7);
}

TEST_CASE("time stepping validation") {
  Discretization d = make_disc(4, 1, 0.5, 0.0);
  Factorization f = factorize(d);
  auto zero = zero_func(d.n_dir());
  TimeSteppingConfig cfg;
  cfg.dt = 0.3;
  cfg.T = 1.0;  // not an integer multiple
  CHECK_THROWS_AS(run_time_series(d, f, zero, zero, zero, cfg), ConfigError);
  cfg.dt = 0;
  cfg.T = 1.0;
  CHECK_THROWS_AS(run_time_series(d, f, zero, zero, zero, cfg), ConfigError);
  cfg.dt = 0.5;
  cfg.tol = 0;
  CHECK_THROWS_AS(run_time_series(d, f, zero, zero, zero, cfg), ConfigError);
  cfg.tol = 1e-8;
  cfg.dt = 1.5;
  cfg.T = 3.0;
  cfg.mode = TimeSteppingConfig::kCellAverage;
  CHECK_THROWS_AS(run_time_series(d, f, zero, zero, zero, cfg), ConfigError);
}

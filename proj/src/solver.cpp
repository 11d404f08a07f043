// SPDX-License-Identifier: MIT
#include "rte/solver.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "rte/errors.hpp"

namespace rte {

namespace {

double round12(double x) {
  if (x == 0) return 0;
  double mag = std::pow(10.0, 12 - std::ceil(std::log10(std::abs(x))));
  return std::round(x * mag) / mag;
}

// Memoized LU of (alpha I + beta A_C); cells sharing optics share factors.
using CellLU = Eigen::PartialPivLU<Eigen::MatrixXd>;

std::shared_ptr<const CellLU> cell_matrix_lu(const CellOptics& o,
                                             const QuadratureSet& quad,
                                             const KernelMatrix& kernel,
                                             double alpha, double beta) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double, int, double, double>,
                  std::shared_ptr<const CellLU>>
      cache;
  const double a1 = o.sigma_T_bar / (o.epsilon_bar * o.epsilon_bar);
  auto key = std::make_tuple(round12(a1), round12(o.sigma_a_bar), kernel.g,
                             quad.n_dir, round12(alpha), round12(beta));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  Eigen::MatrixXd A =
      a1 * Eigen::MatrixXd::Identity(quad.n_dir, quad.n_dir) -
      (a1 - o.sigma_a_bar) * kernel.kappa * quad.w.asDiagonal();
  Eigen::MatrixXd Mshift =
      alpha * Eigen::MatrixXd::Identity(quad.n_dir, quad.n_dir) + beta * A;
  auto lu = std::make_shared<CellLU>(Mshift);
  if (lu->rcond() < 1e-14)
    throw SingularCellSystem("cell collision matrix numerically singular");
  cache[key] = lu;
  return lu;
}

// Fundamental-part contribution at a point / cell center / edge / average.
Eigen::VectorXd basis_combo(const Discretization& d, const SolutionField& f,
                            int c, double x, double y) {
  const CellBasis& b = d.basis[c];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d.n_dir());
  if (f.slow[c].size() > 0)
    for (int j = 0; j < b.n_retained(); ++j) {
      int k = b.retained[j];
      out += f.slow[c][j] * b.value_factor(k, x, y) * b.xi.col(k);
    }
  if (c < static_cast<int>(f.fast.size()) && f.fast[c].size() > 0)
    for (size_t j = 0; j < b.fast.size(); ++j) {
      int k = b.fast[j];
      out += f.fast[c][j] * b.value_factor(k, x, y) * b.xi.col(k);
    }
  return out;
}

Eigen::VectorXd fundamental_average(const Discretization& d,
                                    const SolutionField& f, int c) {
  const CellBasis& b = d.basis[c];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d.n_dir());
  if (f.slow[c].size() > 0)
    for (int j = 0; j < b.n_retained(); ++j) {
      int k = b.retained[j];
      out += f.slow[c][j] * b.avg_factor[k] * b.xi.col(k);
    }
  if (c < static_cast<int>(f.fast.size()) && f.fast[c].size() > 0)
    for (size_t j = 0; j < b.fast.size(); ++j) {
      int k = b.fast[j];
      out += f.fast[c][j] * b.avg_factor[k] * b.xi.col(k);
    }
  return out;
}

// 3x3 tensor Gauss average of a PointFunc over a cell.
Eigen::VectorXd cell_avg_of(const Discretization& d, const PointFunc& fn,
                            int c, double t) {
  static std::vector<double> gn, gw;
  if (gn.empty()) gauss_legendre(3, 0.0, 1.0, gn, gw);
  const double h = d.mesh.h;
  const double x0 = (c % d.mesh.I) * h, y0 = (c / d.mesh.I) * h;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d.n_dir());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out += gw[i] * gw[j] * fn(x0 + gn[i] * h, y0 + gn[j] * h, t);
  return out;
}

}  // namespace

SolutionField zero_field(const Discretization& d, double t) {
  SolutionField f;
  f.t = t;
  f.v = Eigen::MatrixXd::Zero(d.n_dir(), d.n_cells());
  f.slow.resize(d.n_cells());
  f.fast.resize(d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c) {
    f.slow[c] = Eigen::VectorXd::Zero(d.basis[c].n_retained());
    f.fast[c] = Eigen::VectorXd::Zero(d.basis[c].fast.size());
  }
  return f;
}

Eigen::VectorXd evaluate(const Discretization& d, const SolutionField& f,
                         double x, double y) {
  const int I = d.mesh.I;
  int ix = std::min(static_cast<int>(x / d.mesh.h), I - 1);
  int iy = std::min(static_cast<int>(y / d.mesh.h), I - 1);
  if (x < 0 || x > 1 || y < 0 || y > 1)
    throw PointOutsideCell("evaluate: point outside the unit square");
  int c = d.mesh.cell_id(ix, iy);
  return f.v.col(c) + basis_combo(d, f, c, x, y);
}

Eigen::VectorXd center_value(const Discretization& d, const SolutionField& f,
                             int cell) {
  const double h = d.mesh.h;
  double x = (cell % d.mesh.I + 0.5) * h, y = (cell / d.mesh.I + 0.5) * h;
  return f.v.col(cell) + basis_combo(d, f, cell, x, y);
}

Eigen::VectorXd average_value(const Discretization& d, const SolutionField& f,
                              int cell) {
  return f.v.col(cell) + fundamental_average(d, f, cell);
}

Eigen::VectorXd trace_value(const Discretization& d, const SolutionField& f,
                            int cell, int e) {
  const CellBasis& b = d.basis[cell];
  Eigen::VectorXd out = f.v.col(cell);
  if (f.slow[cell].size() > 0)
    for (int j = 0; j < b.n_retained(); ++j) {
      int k = b.retained[j];
      out += f.slow[cell][j] * b.edge_factor(e, k) * b.xi.col(k);
    }
  if (cell < static_cast<int>(f.fast.size()) && f.fast[cell].size() > 0)
    for (size_t j = 0; j < b.fast.size(); ++j) {
      int k = b.fast[j];
      out += f.fast[cell][j] * b.edge_factor(e, k) * b.xi.col(k);
    }
  return out;
}

double discrete_norm(const Discretization& d, const SolutionField& f) {
  double s = 0;
  for (int c = 0; c < d.n_cells(); ++c) s += center_value(d, f, c).squaredNorm();
  return d.mesh.h / std::sqrt(static_cast<double>(d.quad.M)) * std::sqrt(s);
}

double discrete_distance(const Discretization& d, const SolutionField& a,
                         const SolutionField& b) {
  double s = 0;
  for (int c = 0; c < d.n_cells(); ++c)
    s += (center_value(d, a, c) - center_value(d, b, c)).squaredNorm();
  return d.mesh.h / std::sqrt(static_cast<double>(d.quad.M)) * std::sqrt(s);
}

std::vector<Eigen::VectorXd> sample_boundary(const Discretization& d,
                                             const PointFunc& psi, double t) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(d.mesh.boundary_ifaces.size());
  for (int id : d.mesh.boundary_ifaces) {
    const IfaceInfo& info = d.mesh.ifaces[id];
    out.push_back(d.proj[id].restrict_incoming(psi(info.mx, info.my, t)));
  }
  return out;
}

Eigen::MatrixXd solve_particular(const Discretization& d,
                                 const Eigen::MatrixXd& rhs, double alpha,
                                 double beta) {
  Eigen::MatrixXd v(d.n_dir(), d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c) {
    auto lu = cell_matrix_lu(d.optics[c], d.quad, d.kernel, alpha, beta);
    v.col(c) = lu->solve(rhs.col(c));
  }
  return v;
}

Eigen::VectorXd steady_rhs(const Discretization& d, const Factorization& f,
                           const Eigen::MatrixXd& v,
                           const std::vector<Eigen::VectorXd>& boundary) {
  const RowLayout& lay = f.levels[0].rows;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lay.rows);
  for (size_t bi = 0; bi < d.mesh.boundary_ifaces.size(); ++bi) {
    int id = d.mesh.boundary_ifaces[bi];
    const InterfaceProjection& p = d.proj[id];
    if (p.n_slow == 0) continue;
    const IfaceInfo& info = d.mesh.ifaces[id];
    int side = info.cell[0] >= 0 ? 0 : 1;
    Eigen::VectorXd mismatch =
        boundary[bi] - p.restrict_incoming(v.col(info.cell[side]));
    rhs.segment(lay.offset_of[id], p.n_slow) = p.project(mismatch);
  }
  for (int id : d.mesh.interior_at[0]) {
    const InterfaceProjection& p = d.proj[id];
    if (p.n_slow == 0) continue;
    const IfaceInfo& info = d.mesh.ifaces[id];
    // jump convention [f] = side1 - side0; rhs carries -[v]
    Eigen::VectorXd jump = v.col(info.cell[0]) - v.col(info.cell[1]);
    rhs.segment(lay.offset_of[id], p.n_slow) = p.project(jump);
  }
  return rhs;
}

SolutionField steady_solve(const Discretization& d, const Factorization& f,
                           const SteadyProblem& p) {
  SolutionField out = zero_field(d);
  out.v = solve_particular(d, p.rhs);
  Eigen::VectorXd rhs = steady_rhs(d, f, out.v, p.boundary);
  Eigen::VectorXd coef = apply_inverse(f, rhs);
  const LevelOps& lv = f.levels[0];
  for (int c = 0; c < d.n_cells(); ++c)
    if (lv.cell_size[c] > 0)
      out.slow[c] = f.E0[c] * coef.segment(lv.cell_offset[c], lv.cell_size[c]);
  return out;
}

void reconstruct_layers(const Discretization& d,
                        const std::vector<Eigen::VectorXd>& boundary,
                        SolutionField& f) {
  for (int c = 0; c < d.n_cells(); ++c)
    f.fast[c] = Eigen::VectorXd::Zero(d.basis[c].fast.size());

  // Position of mode k inside basis[c].fast.
  auto fast_index = [&](int c, int k) {
    const auto& fl = d.basis[c].fast;
    return static_cast<int>(std::lower_bound(fl.begin(), fl.end(), k) -
                            fl.begin());
  };

  for (int id = 0; id < d.mesh.n_ifaces(); ++id) {
    const InterfaceProjection& p = d.proj[id];
    const IfaceInfo& info = d.mesh.ifaces[id];
    if (p.dim == p.n_slow) continue;  // no fast modes here
    Eigen::VectorXd r;
    if (p.boundary) {
      int side = info.cell[0] >= 0 ? 0 : 1;
      size_t bi = std::lower_bound(d.mesh.boundary_ifaces.begin(),
                                   d.mesh.boundary_ifaces.end(), id) -
                  d.mesh.boundary_ifaces.begin();
      r = p.restrict_incoming(
              trace_value(d, f, info.cell[side], info.edge_of[side])) -
          boundary[bi];
    } else {
      r = trace_value(d, f, info.cell[1], info.edge_of[1]) -
          trace_value(d, f, info.cell[0], info.edge_of[0]);
    }
    Eigen::VectorXd coef = p.expand(r);
    for (size_t j = 0; j < p.fast_src.size(); ++j) {
      auto [side, k] = p.fast_src[j];
      double cj = coef[p.n_slow + static_cast<int>(j)];
      // side-1 / boundary-adjacent contributions enter the residual with a
      // plus sign, side-0 with a minus sign
      double a = (p.boundary || side == 1) ? -cj : cj;
      int cell = info.cell[side];
      f.fast[cell][fast_index(cell, k)] += a;
    }
  }
}

namespace {

SolutionField relax(const Discretization& d, const SolutionField& a,
                    const SolutionField& b, double w) {
  // (1 - w) a + w b (particular + slow parts)
  SolutionField out = zero_field(d, a.t);
  out.v = (1 - w) * a.v + w * b.v;
  for (int c = 0; c < d.n_cells(); ++c)
    out.slow[c] = (1 - w) * a.slow[c] + w * b.slow[c];
  return out;
}

// Flat vector view of (particular constants, slow coefficients) used by the
// Anderson extrapolation.
struct Flattener {
  const Discretization& d;
  int nv = 0, total = 0;
  std::vector<int> slow_off;
  explicit Flattener(const Discretization& dd) : d(dd) {
    nv = d.n_dir() * d.n_cells();
    total = nv;
    slow_off.resize(d.n_cells());
    for (int c = 0; c < d.n_cells(); ++c) {
      slow_off[c] = total;
      total += d.basis[c].n_retained();
    }
  }
  Eigen::VectorXd flatten(const SolutionField& f) const {
    Eigen::VectorXd x(total);
    x.head(nv) = Eigen::Map<const Eigen::VectorXd>(f.v.data(), nv);
    for (int c = 0; c < d.n_cells(); ++c)
      x.segment(slow_off[c], d.basis[c].n_retained()) = f.slow[c];
    return x;
  }
  SolutionField unflatten(const Eigen::VectorXd& x, double t) const {
    SolutionField f = zero_field(d, t);
    Eigen::Map<Eigen::VectorXd>(f.v.data(), nv) = x.head(nv);
    for (int c = 0; c < d.n_cells(); ++c)
      f.slow[c] = x.segment(slow_off[c], d.basis[c].n_retained());
    return f;
  }
};

// Drive x = Phi(x) to tolerance; Phi must include any relaxation. With
// anderson_depth > 0 the iterates are extrapolated from the recent history
// (the map is affine, so the fixed point is unchanged).
SolutionField fixed_point_solve(
    const Discretization& d, const SolutionField& init, double tn,
    const std::function<SolutionField(const SolutionField&)>& phi,
    const TimeSteppingConfig& cfg, StepDiagnostics* diag,
    const char* what) {
  if (diag) *diag = StepDiagnostics{};
  const int depth = cfg.anderson_depth;
  Flattener fl(d);
  Eigen::VectorXd x = fl.flatten(init);
  std::vector<Eigen::VectorXd> xs, fs;  // history for extrapolation
  double res = 0;
  int s = 0;
  SolutionField cur = init;
  cur.t = tn;
  for (; s < cfg.max_iters; ++s) {
    SolutionField nxt = phi(cur);
    res = discrete_distance(d, cur, nxt);
    if (diag) diag->residual_history.push_back(res);
    if (res <= cfg.tol) {
      if (diag) {
        diag->iterations = s + 1;
        diag->final_residual = res;
      }
      return nxt;
    }
    if (depth <= 0) {
      cur = std::move(nxt);
      continue;
    }
    Eigen::VectorXd g = fl.flatten(nxt);
    Eigen::VectorXd f = g - x;
    xs.push_back(x);
    fs.push_back(f);
    if (static_cast<int>(xs.size()) > depth + 1) {
      xs.erase(xs.begin());
      fs.erase(fs.begin());
    }
    const int m = static_cast<int>(xs.size()) - 1;
    if (m == 0) {
      x = g;
    } else {
      Eigen::MatrixXd dF(f.size(), m), dX(f.size(), m);
      for (int j = 0; j < m; ++j) {
        dF.col(j) = fs[j + 1] - fs[j];
        dX.col(j) = xs[j + 1] - xs[j];
      }
      Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
      x = x + f - (dX + dF) * gamma;
    }
    cur = fl.unflatten(x, tn);
  }
  if (diag) {
    diag->iterations = s;
    diag->final_residual = res;
  }
  throw NoConvergence(std::string(what) + ": fixed point did not reach "
                      "tolerance", res, s);
}

}  // namespace

FundamentalSolver make_fundamental_solver(const Discretization& d,
                                          const Factorization& fact) {
  return [&d, &fact](const Eigen::MatrixXd& v,
                     const std::vector<Eigen::VectorXd>& boundary,
                     SolutionField& out) {
    Eigen::VectorXd rhs = steady_rhs(d, fact, v, boundary);
    Eigen::VectorXd coef = apply_inverse(fact, rhs);
    const LevelOps& lv = fact.levels[0];
    for (int c = 0; c < d.n_cells(); ++c)
      if (lv.cell_size[c] > 0)
        out.slow[c] =
            fact.E0[c] * coef.segment(lv.cell_offset[c], lv.cell_size[c]);
  };
}

SolutionField midpoint_step_cell_average(
    const Discretization& d, const FundamentalSolver& fsolve,
    const SolutionField& prev, const PointFunc& source,
    const PointFunc& boundary, const TimeSteppingConfig& cfg,
    StepDiagnostics* diag) {
  if (cfg.dt >= 1.0)
    throw ConfigError(
        "cell_average mode requires dt < 1 (relaxation weight 1 - dt must be "
        "positive); use cell_center mode for dt >= 1");
  const double dt = cfg.dt;
  const double tn = prev.t + dt;
  const double thalf = prev.t + dt / 2;

  // Per-cell constants that do not change over the iteration:
  //   base = q_bar(t_{n-1/2}) + psi_bar^{n-1}/dt - A v^{n-1}/2
  Eigen::MatrixXd base(d.n_dir(), d.n_cells());
  {
    // A v^{n-1} via the shifted solve machinery would need a multiply, not a
    // solve; build A v directly.
    for (int c = 0; c < d.n_cells(); ++c) {
      const CellOptics& o = d.optics[c];
      double a1 = o.sigma_T_bar / (o.epsilon_bar * o.epsilon_bar);
      Eigen::VectorXd Av =
          a1 * prev.v.col(c) -
          (a1 - o.sigma_a_bar) *
              (d.kernel.kappa * (d.quad.w.asDiagonal() * prev.v.col(c)));
      base.col(c) = cell_avg_of(d, source, c, thalf) +
                    average_value(d, prev, c) / dt - 0.5 * Av;
    }
  }
  std::vector<Eigen::VectorXd> bdata = sample_boundary(d, boundary, tn);

  auto phi = [&](const SolutionField& cur) {
    // rhs = base - g_bar^{s-1}/dt, solved against (I/dt + A/2)
    Eigen::MatrixXd rhs(d.n_dir(), d.n_cells());
    for (int c = 0; c < d.n_cells(); ++c)
      rhs.col(c) = base.col(c) - fundamental_average(d, cur, c) / dt;

    SolutionField ds = zero_field(d, tn);
    ds.v = solve_particular(d, rhs, 1.0 / dt, 0.5);
    fsolve(ds.v, bdata, ds);

    SolutionField next = relax(d, cur, ds, dt);
    next.t = tn;
    return next;
  };
  SolutionField cur = fixed_point_solve(d, prev, tn, phi, cfg, diag,
                                        "midpoint_step_cell_average");
  if (cfg.reconstruct) reconstruct_layers(d, bdata, cur);
  return cur;
}

SolutionField midpoint_step_cell_center(
    const Discretization& d, const FundamentalSolver& fsolve,
    const SolutionField& prev, const PointFunc& source,
    const PointFunc& boundary, const TimeSteppingConfig& cfg,
    StepDiagnostics* diag) {
  const double dt = cfg.dt;
  const double tn = prev.t + dt;
  const double thalf = prev.t + dt / 2;
  const double h = d.mesh.h;

  Eigen::MatrixXd qc(d.n_dir(), d.n_cells());
  Eigen::MatrixXd prev_center(d.n_dir(), d.n_cells());
  for (int c = 0; c < d.n_cells(); ++c) {
    double x = (c % d.mesh.I + 0.5) * h, y = (c / d.mesh.I + 0.5) * h;
    qc.col(c) = source(x, y, thalf);
    prev_center.col(c) = center_value(d, prev, c);
  }
  std::vector<Eigen::VectorXd> bdata = sample_boundary(d, boundary, tn);

  auto collide = [&](const Eigen::VectorXd& v, int c) {
    const CellOptics& o = d.optics[c];
    double a1 = o.sigma_T_bar / (o.epsilon_bar * o.epsilon_bar);
    return (a1 * v -
            (a1 - o.sigma_a_bar) * (d.kernel.kappa * (d.quad.w.asDiagonal() * v)))
        .eval();
  };

  auto phi = [&](const SolutionField& cur) {
    // explicit center update; L annihilates fundamental parts exactly
    SolutionField next = zero_field(d, tn);
    for (int c = 0; c < d.n_cells(); ++c) {
      Eigen::VectorXd psi_c =
          prev_center.col(c) +
          dt * (qc.col(c) -
                0.5 * (collide(cur.v.col(c), c) + collide(prev.v.col(c), c)));
      // particular constant = center value minus the lagged slow-mode
      // center contribution (fast layers negligible at centers)
      double x = (c % d.mesh.I + 0.5) * h, y = (c / d.mesh.I + 0.5) * h;
      const CellBasis& b = d.basis[c];
      Eigen::VectorXd gslow = Eigen::VectorXd::Zero(d.n_dir());
      for (int j = 0; j < b.n_retained(); ++j) {
        int k = b.retained[j];
        gslow += cur.slow[c][j] * b.value_factor(k, x, y) * b.xi.col(k);
      }
      next.v.col(c) = psi_c - gslow;
    }
    fsolve(next.v, bdata, next);
    return next;
  };
  SolutionField cur = fixed_point_solve(d, prev, tn, phi, cfg, diag,
                                        "midpoint_step_cell_center");
  if (cfg.reconstruct) reconstruct_layers(d, bdata, cur);
  return cur;
}

TimeSeriesResult run_time_series(const Discretization& d,
                                 const FundamentalSolver& fsolve,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg) {
  if (cfg.dt <= 0 || cfg.dt > cfg.T)
    throw ConfigError("run_time_series: need 0 < dt <= T");
  if (cfg.tol <= 0) throw ConfigError("run_time_series: tol must be positive");
  double steps = cfg.T / cfg.dt;
  int N = static_cast<int>(std::lround(steps));
  if (std::abs(steps - N) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("run_time_series: T must be an integer multiple of dt");

  TimeSeriesResult out;
  SolutionField psi = zero_field(d, 0.0);
  const double h = d.mesh.h;
  for (int c = 0; c < d.n_cells(); ++c) {
    double x = (c % d.mesh.I + 0.5) * h, y = (c / d.mesh.I + 0.5) * h;
    psi.v.col(c) = initial(x, y, 0.0);
  }
  out.fields.push_back(psi);
  for (int n = 1; n <= N; ++n) {
    StepDiagnostics diag;
    psi = (cfg.mode == TimeSteppingConfig::kCellAverage)
              ? midpoint_step_cell_average(d, fsolve, psi, source, boundary,
                                           cfg, &diag)
              : midpoint_step_cell_center(d, fsolve, psi, source, boundary,
                                          cfg, &diag);
    out.fields.push_back(psi);
    out.diags.push_back(std::move(diag));
  }
  return out;
}

TimeSeriesResult run_time_series(const Discretization& d,
                                 const Factorization& fact,
                                 const PointFunc& initial,
                                 const PointFunc& boundary,
                                 const PointFunc& source,
                                 const TimeSteppingConfig& cfg) {
  return run_time_series(d, make_fundamental_solver(d, fact), initial,
                         boundary, source, cfg);
}

}  // namespace rte

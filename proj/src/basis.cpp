// SPDX-License-Identifier: MIT
#include "rte/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "rte/errors.hpp"

namespace rte {

namespace {

// Memo key: rho rounded to 12 significant digits, plus axis, kernel g and
// quadrature shape. Cells sharing optics share eigen systems.
struct MemoKey {
  long long rho_q;
  long long g_q;
  int n_polar, n_azimuth, axis;
  bool operator<(const MemoKey& o) const {
    return std::tie(rho_q, g_q, n_polar, n_azimuth, axis) <
           std::tie(o.rho_q, o.g_q, o.n_polar, o.n_azimuth, o.axis);
  }
};

long long quantize(double v) {
  // 12 significant digits on a fixed 1e-14 grid (values here are O(1)).
  return static_cast<long long>(std::llround(v * 1e12));
}

std::map<MemoKey, std::shared_ptr<const EigenSystem>>& memo_table() {
  static std::map<MemoKey, std::shared_ptr<const EigenSystem>> table;
  return table;
}
std::mutex& memo_mutex() {
  static std::mutex mu;
  return mu;
}

std::shared_ptr<const EigenSystem> solve_eigen(int axis, double rho,
                                               const QuadratureSet& quad,
                                               const KernelMatrix& kernel) {
  const int n = quad.n_dir;
  const Eigen::VectorXd& d = (axis == 0) ? quad.c : quad.s;
  Eigen::MatrixXd Mmat =
      rho * (kernel.kappa * quad.w.asDiagonal()) - Eigen::MatrixXd::Identity(n, n);
  for (int m = 0; m < n; ++m) Mmat.row(m) /= d[m];

  Eigen::EigenSolver<Eigen::MatrixXd> es(Mmat);
  Eigen::VectorXcd ev = es.eigenvalues();
  Eigen::MatrixXcd evec = es.eigenvectors();
  double scale = std::max(1.0, Mmat.cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k) {
    if (std::abs(ev[k].imag()) > 1e-8 * scale)
      throw NonRealSpectrum(
          "eigen_systems: complex eigenvalue encountered (imag = " +
          std::to_string(ev[k].imag()) + ")");
  }

  auto sys = std::make_shared<EigenSystem>();
  sys->axis = axis;
  sys->lambda.resize(n);
  sys->xi.resize(n, n);
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ev[a].real() < ev[b].real();
  });
  for (int k = 0; k < n; ++k) {
    int src = order[k];
    sys->lambda[k] = ev[src].real();
    Eigen::VectorXd v = evec.col(src).real();
    // If the real part degenerated (shouldn't for a real spectrum), fall
    // back to the imaginary part.
    if (v.cwiseAbs().maxCoeff() < 1e-12) v = evec.col(src).imag();
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v /= v[imax];  // unit max-norm, deterministic sign
    sys->xi.col(k) = v;
  }
  return sys;
}

}  // namespace

std::pair<std::shared_ptr<const EigenSystem>, std::shared_ptr<const EigenSystem>>
eigen_systems(const CellOptics& optics, const QuadratureSet& quad,
              const KernelMatrix& kernel) {
  if (optics.rho < 0.0 || optics.rho > 1.0)
    throw ConfigError("eigen_systems: rho must lie in [0,1]");
  std::pair<std::shared_ptr<const EigenSystem>, std::shared_ptr<const EigenSystem>> out;
  for (int axis = 0; axis < 2; ++axis) {
    MemoKey key{quantize(optics.rho), quantize(kernel.g), quad.n_polar,
                quad.n_azimuth, axis};
    std::shared_ptr<const EigenSystem> sys;
    {
      std::lock_guard<std::mutex> lock(memo_mutex());
      auto it = memo_table().find(key);
      if (it != memo_table().end()) sys = it->second;
    }
    if (!sys) {
      sys = solve_eigen(axis, optics.rho, quad, kernel);
      std::lock_guard<std::mutex> lock(memo_mutex());
      memo_table().emplace(key, sys);
    }
    (axis == 0 ? out.first : out.second) = sys;
  }
  return out;
}

double CellBasis::value_factor(int k, double x, double y) const {
  const double tol = 1e-12 * h;
  if (x < x0 - tol || x > x0 + h + tol || y < y0 - tol || y > y0 + h + tol)
    throw PointOutsideCell("evaluate_basis: point outside cell");
  double coord = (k < n_dir) ? x : y;
  double a;
  switch (anchor[k]) {
    case kLeft: a = x0; break;
    case kRight: a = x0 + h; break;
    case kBottom: a = y0; break;
    default: a = y0 + h; break;
  }
  return std::exp(lambda[k] * optics.Sigma_t * (coord - a));
}

CellBasis build_cell_basis(const CellOptics& optics, const QuadratureSet& quad,
                           const KernelMatrix& kernel, double x0, double y0,
                           double h, double delta) {
  auto [sx, sy] = eigen_systems(optics, quad, kernel);
  const int n = quad.n_dir;

  CellBasis b;
  b.cell = optics.cell;
  b.optics = optics;
  b.h = h;
  b.x0 = x0;
  b.y0 = y0;
  b.n_dir = n;
  b.n_modes = 2 * n;
  b.lambda.resize(2 * n);
  b.xi.resize(n, 2 * n);
  b.anchor.resize(2 * n);
  b.center_mag.resize(2 * n);
  b.edge_factor.resize(4, 2 * n);
  b.avg_factor.resize(2 * n);

  for (int k = 0; k < 2 * n; ++k) {
    const EigenSystem& sys = (k < n) ? *sx : *sy;
    int j = (k < n) ? k : k - n;
    double lam = sys.lambda[j];
    b.lambda[k] = lam;
    b.xi.col(k) = sys.xi.col(j);
    bool xaxis = (k < n);
    b.anchor[k] = xaxis ? (lam <= 0 ? kLeft : kRight) : (lam <= 0 ? kBottom : kTop);

    double a = std::abs(lam) * optics.Sigma_t * h;  // full-cell decay exponent
    b.center_mag[k] = std::exp(-0.5 * a);
    b.avg_factor[k] = (a < 1e-13) ? 1.0 : (1.0 - std::exp(-a)) / a;

    // Value multiplier at the four edge midpoints.
    double at_anchor = 1.0, at_opposite = std::exp(-a), at_center = b.center_mag[k];
    for (int e = 0; e < 4; ++e) {
      bool parallel_axis = xaxis ? (e == kLeft || e == kRight)
                                 : (e == kBottom || e == kTop);
      if (!parallel_axis) {
        b.edge_factor(e, k) = at_center;
      } else {
        b.edge_factor(e, k) = (e == b.anchor[k]) ? at_anchor : at_opposite;
      }
    }
  }

  select_slow_basis(b, delta);
  return b;
}

void select_slow_basis(CellBasis& b, double delta) {
  if (delta < 0) throw ConfigError("select_slow_basis: delta must be >= 0");
  b.delta = delta;
  b.retained.clear();
  b.fast.clear();
  for (auto& v : b.retained_at) v.clear();
  for (auto& v : b.fast_at) v.clear();
  for (int k = 0; k < b.n_modes; ++k) {
    if (b.center_mag[k] > delta) {
      b.retained.push_back(k);
      b.retained_at[b.anchor[k]].push_back(k);
    } else {
      b.fast.push_back(k);
      b.fast_at[b.anchor[k]].push_back(k);
    }
  }
}

Eigen::VectorXd evaluate_basis(const CellBasis& b, int k, double x, double y) {
  return b.xi.col(k) * b.value_factor(k, x, y);
}

double rank_ratio(const std::vector<CellBasis>& cells) {
  long long kept = 0, total = 0;
  for (const auto& c : cells) {
    kept += c.n_retained();
    total += c.n_modes;
  }
  return static_cast<double>(kept) / static_cast<double>(total);
}

}  // namespace rte

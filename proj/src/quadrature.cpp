// SPDX-License-Identifier: MIT
#include "rte/quadrature.hpp"

#include <cmath>

#include "rte/errors.hpp"

namespace rte {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Newton iteration on P_n over [-1,1], then affine map to (a,b).
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double pnm1 = (n == 1) ? 1.0 : p0;
      pp = n * (x * pn - pnm1) / (x * x - 1.0);
      double dx = pn / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double wj = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = 0.5 * (b - a) * x + 0.5 * (a + b);
    weights[i] = 0.5 * (b - a) * wj;
  }
  // ascending order
  for (int i = 0; i < n / 2; ++i) {
    std::swap(nodes[i], nodes[n - 1 - i]);
    std::swap(weights[i], weights[n - 1 - i]);
  }
}

QuadratureSet build_quadrature(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 1)
    throw ConfigError("build_quadrature: n_polar and n_azimuth must be >= 1");

  QuadratureSet q;
  q.n_polar = n_polar;
  q.n_azimuth = n_azimuth;
  q.M = n_polar * n_azimuth;
  q.n_dir = 4 * q.M;
  q.c.resize(q.n_dir);
  q.s.resize(q.n_dir);
  q.w.resize(q.n_dir);

  std::vector<double> mu, wmu;
  gauss_legendre(n_polar, 0.0, 1.0, mu, wmu);

  const double pi = std::acos(-1.0);
  // Quadrant sign patterns: (+,+), (-,+), (-,-), (+,-).
  const int sc[4] = {+1, -1, -1, +1};
  const int ss[4] = {+1, +1, -1, -1};
  for (int quad = 0; quad < 4; ++quad) {
    for (int p = 0; p < n_polar; ++p) {
      double sint = std::sqrt(1.0 - mu[p] * mu[p]);
      for (int a = 0; a < n_azimuth; ++a) {
        double phi = (2.0 * a + 1.0) * pi / (4.0 * n_azimuth);
        int m = quad * q.M + p * n_azimuth + a;
        q.c[m] = sc[quad] * sint * std::cos(phi);
        q.s[m] = ss[quad] * sint * std::sin(phi);
        q.w[m] = wmu[p] / (4.0 * n_azimuth);
      }
    }
  }
  return q;
}

KernelMatrix discrete_kernel(const QuadratureSet& quad, double g) {
  if (!(std::abs(g) < 1.0))
    throw ConfigError("discrete_kernel: |g| must be < 1");

  const int n = quad.n_dir;
  KernelMatrix K;
  K.g = g;
  K.kappa.resize(n, n);
  for (int m = 0; m < n; ++m) {
    for (int p = 0; p < n; ++p) {
      double dot = quad.c[m] * quad.c[p] + quad.s[m] * quad.s[p];
      double denom = 1.0 + g * g - 2.0 * g * dot;
      K.kappa(m, p) = (1.0 - g * g) / (denom * std::sqrt(denom));
    }
  }
  // Row renormalization: sum_p kappa_{m,p} w_p = 1.
  for (int m = 0; m < n; ++m) {
    double rowsum = K.kappa.row(m).dot(quad.w.transpose());
    K.kappa.row(m) /= rowsum;
  }
  return K;
}

}  // namespace rte

// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rte {

// Gauss-Legendre nodes/weights on (a, b). Used for the polar quadrature and
// for cell averaging of material coefficients and sources.
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Discrete-ordinates direction set in x-y geometry.
//
// Directions are projections of 3D ordinates onto the unit disc: polar
// cosines mu_p are Gauss-Legendre nodes on (0,1), azimuths per quadrant are
// midpoints phi_a = (2a-1)pi/(4 n_azimuth), and
//   (c, s) = sqrt(1 - mu_p^2) (cos phi_a, sin phi_a).
// Weights sum to 1 so the isotropic scattering operator is an averaging
// operator. Ordering: quadrant-major (signs (+,+), (-,+), (-,-), (+,-)),
// then polar index, then azimuth index.
struct QuadratureSet {
  int n_polar = 0;
  int n_azimuth = 0;
  int M = 0;      // directions per quadrant
  int n_dir = 0;  // 4M
  Eigen::VectorXd c, s, w;
};

QuadratureSet build_quadrature(int n_polar, int n_azimuth);

// Discretized Henyey-Greenstein scattering kernel with per-row
// renormalization sum_p kappa_{m,p} w_p = 1 (discrete conservation).
struct KernelMatrix {
  double g = 0.0;
  Eigen::MatrixXd kappa;  // 4M x 4M
};

KernelMatrix discrete_kernel(const QuadratureSet& quad, double g);

}  // namespace rte

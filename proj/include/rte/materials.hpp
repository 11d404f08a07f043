// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rte {

// Axis-aligned rectangle with its own epsilon value (lattice blocks).
struct EpsRectangle {
  double x0, x1, y0, y1;
  double eps;
};

// Spatially varying optical coefficients on [0,1]^2.
struct MaterialField {
  std::function<double(double, double)> sigma_T;
  std::function<double(double, double)> sigma_a;
  std::function<double(double, double)> epsilon;
  std::string description;
};

// Per-cell effective (diffusively scaled) cross sections:
//   Sigma_t = sigma_T_bar / epsilon_bar
//   Sigma_s = sigma_T_bar / epsilon_bar - epsilon_bar * sigma_a_bar
//   rho     = Sigma_s / Sigma_t
struct CellOptics {
  int cell = -1;
  double sigma_T_bar = 0;
  double sigma_a_bar = 0;
  double epsilon_bar = 0;
  double Sigma_t = 0;
  double Sigma_s = 0;
  double rho = 0;
};

// Cell means by 3x3 tensor Gauss quadrature over [x0,x0+h] x [y0,y0+h]
// (exact for the quadratic bufferzone coefficients).
CellOptics cell_average(const MaterialField& field, int cell_id, double x0,
                        double y0, double h);

// Named coefficient fields.
//   constant:   sigma_T, sigma_a, epsilon constants (params[0..2])
//   bufferzone: sigma_T = 1 + x^2 + y^2, sigma_a = 0.5 + x^2 + y^2,
//               epsilon = 0.02 x + 0.001
//   lattice:    sigma_T = 1, sigma_a = 0.5, epsilon piecewise from rectangles
//               (background epsilon = params[0], default 1)
MaterialField constant_field(double sigma_T, double sigma_a, double epsilon);
MaterialField bufferzone_field();
MaterialField lattice_field(const std::vector<EpsRectangle>& rects,
                            double background_eps = 1.0);

// Default lattice rectangle layout: a checkerboard of diffusive blocks of
// width 1/8 inside the central region of a transport background. This is an
// approximation of the benchmark figure (exact geometry is configuration
// data, not specified numerically).
std::vector<EpsRectangle> default_lattice_rectangles(double eps_diffusive = 0.01);

// Tiny arithmetic-expression parser for config-provided coefficient fields.
// Grammar: numbers, x, y, + - * / ^, unary minus, parentheses.
std::function<double(double, double)> parse_expression(const std::string& text);

}  // namespace rte

// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace rte {

// Configuration / precondition violations (bad user input).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Eigen-decomposition of a cell produced eigenvalues with a significant
// imaginary part; signals an unsupported kernel/quadrature combination.
struct NonRealSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// sigma_a below the supported threshold: a zero eigenvalue appears and the
// anchor rule for basis functions degenerates.
struct DegenerateSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Interface mode vectors fail to span / are numerically dependent.
struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A per-cell dual-basis or lifting system is numerically singular.
struct SingularLocalSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The per-cell particular solve matrix is singular (rho = 1 case).
struct SingularCellSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coarsest-level dense block is numerically singular.
struct CoarseSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dense oracle was requested above its size cap.
struct SizeGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation point outside the closed cell.
struct PointOutsideCell : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-point iteration failed to reach tolerance.
struct NoConvergence : std::runtime_error {
  double last_residual;
  int iterations;
  NoConvergence(const std::string& what, double residual, int iters)
      : std::runtime_error(what), last_residual(residual), iterations(iters) {}
};

}  // namespace rte

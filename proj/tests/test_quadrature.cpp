// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <rte/errors.hpp>
#include <rte/quadrature.hpp>

using namespace rte;

TEST_CASE("gauss_legendre reproduces known nodes") {
  std::vector<double> x, w;
  gauss_legendre(2, -1.0, 1.0, x, w);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-14));

  // degree-5 polynomial integrated exactly by 3 nodes
  gauss_legendre(3, 0.0, 1.0, x, w);
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 5);
  CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("build_quadrature basic structure") {
  for (auto [np, na] : {std::pair{1, 1}, {1, 3}, {2, 3}, {3, 2}}) {
    QuadratureSet q = build_quadrature(np, na);
    CHECK(q.M == np * na);
    CHECK(q.n_dir == 4 * q.M);
    CHECK(q.w.sum() == doctest::Approx(1.0).epsilon(1e-14));
    // all weights positive, directions inside the unit disc
    for (int m = 0; m < q.n_dir; ++m) {
      CHECK(q.w[m] > 0);
      CHECK(q.c[m] * q.c[m] + q.s[m] * q.s[m] < 1.0);
    }
    // quadrant-major ordering: signs (+,+), (-,+), (-,-), (+,-)
    const double sc[4] = {+1, -1, -1, +1}, ss[4] = {+1, +1, -1, -1};
    for (int quad = 0; quad < 4; ++quad)
      for (int p = 0; p < q.M; ++p) {
        int m = quad * q.M + p;
        CHECK(q.c[m] * sc[quad] > 0);
        CHECK(q.s[m] * ss[quad] > 0);
        // mirror of the first quadrant
        CHECK(q.c[m] == doctest::Approx(sc[quad] * q.c[p]).epsilon(1e-14));
        CHECK(q.s[m] == doctest::Approx(ss[quad] * q.s[p]).epsilon(1e-14));
        CHECK(q.w[m] == doctest::Approx(q.w[p]).epsilon(1e-14));
      }
  }
}

TEST_CASE("build_quadrature (1,1) forced by symmetry") {
  QuadratureSet q = build_quadrature(1, 1);
  // single polar node mu = 1/2, azimuth 45 degrees
  double r = std::sqrt(1.0 - 0.25) * std::cos(M_PI / 4.0);
  CHECK(q.c[0] == doctest::Approx(r).epsilon(1e-14));
  CHECK(q.s[0] == doctest::Approx(r).epsilon(1e-14));
  for (int m = 0; m < 4; ++m) CHECK(q.w[m] == doctest::Approx(0.25));
}

TEST_CASE("build_quadrature rejects zero counts") {
  CHECK_THROWS_AS(build_quadrature(0, 1), ConfigError);
  CHECK_THROWS_AS(build_quadrature(1, 0), ConfigError);
}

TEST_CASE("discrete_kernel isotropic and normalized") {
  QuadratureSet q = build_quadrature(1, 3);
  KernelMatrix k0 = discrete_kernel(q, 0.0);
  CHECK((k0.kappa.array() - 1.0).abs().maxCoeff() < 1e-14);

  KernelMatrix k = discrete_kernel(q, 0.5);
  Eigen::VectorXd rowsum = k.kappa * q.w;
  CHECK((rowsum.array() - 1.0).abs().maxCoeff() < 1e-13);
  // forward peaked: self-scattering dominates back-scattering
  for (int m = 0; m < q.n_dir; ++m)
    CHECK(k.kappa(m, m) > k.kappa(m, (m + 2 * q.M) % q.n_dir));

  CHECK_THROWS_AS(discrete_kernel(q, 1.0), ConfigError);
  CHECK_THROWS_AS(discrete_kernel(q, -1.0), ConfigError);
}

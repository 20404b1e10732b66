#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "conelab/quadrature.hpp"

using namespace conelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Periodic trapezoid over theta in [0, pi] for an even, 2pi-periodic integrand:
// spectrally accurate when the integrand is smooth (rho != R).
double trapezoid_kernel(int n, double R, double rho, double alpha, int points) {
  const double h = std::numbers::pi / points;
  double sum = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == points) ? 0.5 : 1.0;
    sum += w * std::pow(R * R + rho * rho - 2 * R * rho * std::cos(t), 0.5 * (alpha - n)) *
           std::pow(std::sin(t), n - 2);
  }
  return unit_sphere_area(n - 1) * sum * h;
}

}  // namespace

TEST_CASE("integrate_adaptive: smooth and singular integrands") {
  const auto sq = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0);
  CHECK_THAT(sq.value, WithinAbs(1.0 / 3.0, 1e-14));

  QuadratureSpec spec;
  const auto inv_sqrt = integrate_adaptive([](double t) { return 1.0 / std::sqrt(1.0 - t); }, 0.0, 1.0,
                                           spec.with_singularity(Endpoint::upper, -0.5));
  CHECK_THAT(inv_sqrt.value, WithinRel(2.0, 1e-12));

  // Beta(1/2, 1/2) = pi, with the oracle from the standard library.
  const auto beta_spec = spec.with_singularity(Endpoint::lower, -0.5).with_singularity(Endpoint::upper, -0.5);
  const auto beta = integrate_adaptive([](double t) { return 1.0 / std::sqrt(t * (1.0 - t)); }, 0.0, 1.0, beta_spec);
  CHECK_THAT(beta.value, WithinRel(std::beta(0.5, 0.5), 1e-11));
  CHECK_THAT(beta.value, WithinRel(std::numbers::pi, 1e-11));

  // A stronger singularity, Beta(0.1, 0.7).
  const auto b2 = integrate_adaptive([](double t) { return std::pow(t, -0.9) * std::pow(1 - t, -0.3); }, 0.0, 1.0,
                                     spec.with_singularity(Endpoint::lower, -0.9).with_singularity(Endpoint::upper, -0.3));
  CHECK_THAT(b2.value, WithinRel(std::beta(0.1, 0.7), 1e-10));
}

TEST_CASE("integrate_adaptive: errors") {
  QuadratureSpec bad;
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, bad.with_singularity(Endpoint::lower, -1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 1.0, 0.0), std::invalid_argument);

  QuadratureSpec tight;
  tight.max_subdivisions = 3;
  tight.rel_tol = 1e-14;
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sin(1.0 / x); }, 1e-3, 1.0, tight), QuadratureError);
}

TEST_CASE("integrate_adaptive: reported error bounds a refined rerun") {
  QuadratureSpec coarse;
  coarse.rel_tol = 1e-6;
  QuadratureSpec fine;
  fine.rel_tol = 0.5e-6;
  fine.abs_tol = 0.5e-13;
  for (double a : {0.3, 1.7, 4.2}) {
    auto f = [a](double x) { return std::exp(-a * x) * std::cos(5 * x) + std::sqrt(x); };
    const auto c = integrate_adaptive(f, 0.0, 3.0, coarse);
    const auto r = integrate_adaptive(f, 0.0, 3.0, fine);
    CHECK(std::abs(c.value - r.value) <= c.error);
  }
}

TEST_CASE("integrate_tail: power decay") {
  CHECK_THAT(integrate_tail([](double x) { return 1.0 / (x * x); }, -2.0, 1.0, 1.0).value, WithinRel(1.0, 1e-9));
  const double s = 3.0;
  CHECK_THAT(integrate_tail([s](double x) { return (s / x) * (s / x); }, -2.0, s * s, s).value, WithinRel(3.0, 1e-9));
  CHECK_THAT(integrate_tail([](double x) { return std::pow(x, -2.5); }, -2.5, 1.0, 1.0).value,
             WithinRel(2.0 / 3.0, 1e-9));
  CHECK_THROWS_AS(integrate_tail([](double x) { return 1.0 / x; }, -1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("angular_kernel: closed forms and limits") {
  // rho -> 0: sigma_{n-1} R^{alpha-n}
  for (int n : {1, 2, 3, 4, 5}) {
    const double alpha = 0.5 * n;
    const double limit = unit_sphere_area(n) * std::pow(2.0, alpha - n);
    CHECK_THAT(angular_kernel(n, 2.0, 1e-7, alpha), WithinRel(limit, 1e-5));
    CHECK(angular_kernel(n, 2.0, 0.0, alpha) == limit);
  }
  CHECK_THAT(angular_kernel(1, 2.0, 1.0, 0.5), WithinRel(1.0 + 1.0 / std::sqrt(3.0), 1e-15));

  // n = 3 closed form against the generic angular quadrature.
  CHECK_THAT(angular_kernel(3, 1.0, 0.9, 1.5), WithinRel(angular_kernel_quadrature(3, 1.0, 0.9, 1.5), 1e-8));
  for (double rho : {0.1, 0.5, 0.99, 1.01, 3.0})
    for (double alpha : {0.3, 1.0, 1.7, 2.6})
      CHECK_THAT(angular_kernel(3, 1.0, rho, alpha), WithinRel(angular_kernel_quadrature(3, 1.0, rho, alpha), 1e-8));

  CHECK_THROWS_AS(angular_kernel(3, 1.0, 0.5, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(angular_kernel(3, 1.0, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(angular_kernel(9, 1.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("angular_kernel: generic dimensions against periodic trapezoid") {
  for (int n : {2, 4, 6, 8})
    for (double rho : {0.2, 0.7, 1.6})
      CHECK_THAT(angular_kernel(n, 1.0, rho, 0.5 * n), WithinRel(trapezoid_kernel(n, 1.0, rho, 0.5 * n, 4000), 1e-9));
}

TEST_CASE("angular_kernel: symmetry and homogeneity") {
  for (int n : {1, 2, 3, 5}) {
    for (double alpha : {0.4, 0.5 * n}) {
      if (!(alpha < n)) continue;
      const double R = 1.3, rho = 0.6;
      CHECK_THAT(angular_kernel(n, R, rho, alpha), WithinRel(angular_kernel(n, rho, R, alpha), 1e-9));
      for (double lambda : {0.01, 2.5, 40.0})
        CHECK_THAT(angular_kernel(n, lambda * R, lambda * rho, alpha),
                   WithinRel(std::pow(lambda, alpha - n) * angular_kernel(n, R, rho, alpha), 1e-9));
    }
  }
}

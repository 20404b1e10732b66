#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/weights.hpp"

using namespace conelab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Random piecewise exponent and a weight with one or two support intervals.
struct Case {
  ExponentFunction p;
  Weight w;
};

Case random_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> npieces(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = npieces(rng);
  std::vector<double> breaks;
  double b = 0.0;
  for (int i = 1; i < k; ++i) breaks.push_back(b += 0.2 + 2.0 * u(rng));
  std::vector<double> values;
  for (int i = 0; i < k; ++i) values.push_back(1.0 + std::floor(4.0 * u(rng)) * 0.5);
  std::vector<WeightPiece> pieces;
  const double first_hi = 0.5 + 4.0 * u(rng);
  pieces.push_back({0.0, first_hi, 1.0 + u(rng), -0.5 + u(rng)});
  if (u(rng) < 0.5) pieces.push_back({first_hi + 1.0 + u(rng), u(rng) < 0.5 ? kInf : first_hi + 6.0, 2.0, 0.0});
  return {ExponentFunction(breaks, values), Weight(pieces)};
}

}  // namespace

TEST_CASE("weight_integral: closed forms") {
  CHECK(weight_integral(Weight::power(0.0), 0.0, 1.0).value() == 1.0);
  CHECK_THAT(weight_integral(Weight::power(0.5), 0.0, 2.0).value(), WithinRel(std::pow(2.0, 1.5) / 1.5, 1e-15));
  const double quad = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 2.0,
                                         QuadratureSpec{}.with_singularity(Endpoint::lower, 0.5))
                          .value;
  CHECK_THAT(weight_integral(Weight::power(0.5), 0.0, 2.0).value(), WithinAbs(quad, 1e-10));
  CHECK(weight_integral(Weight::power(-1.0), 0.0, 1.0).is_divergent());
  CHECK(weight_integral(Weight::power(-1.5), 0.0, 1.0).is_divergent());
  CHECK(weight_integral(Weight::power(-1.0), 1.0, kInf).is_divergent());
  CHECK_THAT(weight_integral(Weight::power(-2.0), 1.0, kInf).value(), WithinRel(1.0, 1e-15));
  CHECK_THAT(weight_integral(Weight::power(-1.0), 1.0, std::exp(1.0)).value(), WithinRel(1.0, 1e-15));
  // near-logarithmic exponent stays accurate
  CHECK_THAT(weight_integral(Weight::power(-1.0 + 1e-9), 1.0, std::exp(1.0)).value(), WithinRel(1.0, 1e-8));

  // Radial: \int_{B(0,1)} 1 = volume of the unit ball.
  CHECK_THAT(weight_integral(Weight::power(0.0, Geometry::radial(3)), 0.0, 1.0).value(),
             WithinRel(4.0 * std::numbers::pi / 3.0, 1e-15));
  CHECK_THAT(weight_integral(Weight::power(0.0, Geometry::radial(1)), 0.0, 1.0).value(), WithinRel(2.0, 1e-15));

  // Zero outside the pieces.
  const Weight step({{1.0, 2.0, 3.0, 0.0}});
  CHECK(weight_integral(step, 0.0, 1.0).value() == 0.0);
  CHECK(weight_integral(step, 0.0, kInf).value() == 3.0);
}

TEST_CASE("Weight: validation and support") {
  CHECK_THROWS_AS(Weight({{0.0, 1.0, 0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Weight({{0.0, 2.0, 1.0, 0.0}, {1.0, 3.0, 1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Weight({{2.0, 1.0, 1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Weight({}), std::invalid_argument);
  const Weight w({{2.0, 3.0, 1.0, 0.0}, {0.0, 1.0, 1.0, 0.0}, {1.0, 2.0, 5.0, 1.0}});
  const auto supp = w.support();
  REQUIRE(supp.size() == 1);
  CHECK(supp[0] == std::pair{0.0, 3.0});
  CHECK(w(0.5) == 1.0);
  CHECK(w(1.5) == 7.5);
  CHECK(w(3.5) == 0.0);
}

TEST_CASE("ExponentFunction: validation") {
  CHECK_THROWS_AS(ExponentFunction::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ExponentFunction::constant(INFINITY), std::invalid_argument);
  CHECK_THROWS_AS(ExponentFunction({1.0, 0.5}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(ExponentFunction({1.0}, {1.0}), std::invalid_argument);
  const auto p = ExponentFunction({1.0, 2.0}, {2.0, 2.5, 3.0});
  CHECK(p(0.5) == 2.0);
  CHECK(p(1.0) == 2.5);
  CHECK(p(7.0) == 3.0);
  CHECK(p.p_minus() == 2.0);
  CHECK(p.p_plus() == 3.0);
}

TEST_CASE("oscillation: hand-evaluated examples") {
  const auto one = Weight::power(0.0);
  for (double d : {0.1, 1.0, 100.0}) CHECK(*oscillation(ExponentFunction::constant(2.0), one, d) == 0.0);
  const auto p = ExponentFunction::split(2.0, 1.0, 3.0);
  CHECK(*oscillation(p, one, 0.5) == 0.0);
  CHECK(*oscillation(p, one, 2.0) == 1.0);
  CHECK(*oscillation(p, one, 1.0) == 0.0);  // (0,1) sees only p = 2

  const Weight inside({{0.0, 1.0, 1.0, 0.0}});
  for (double d : {0.1, 1.0, 2.0, 50.0}) CHECK(*oscillation(p, inside, d) == 0.0);

  const Weight far({{2.0, 3.0, 1.0, 0.0}});
  CHECK_FALSE(oscillation(p, far, 1.0).has_value());
  CHECK(oscillation(p, far, 2.5).has_value());
  CHECK_THROWS_AS(oscillation(p, one, 0.0), std::invalid_argument);
}

TEST_CASE("oscillation_limit") {
  CHECK(oscillation_limit(ExponentFunction::constant(2.0), Weight::power(0.0)) == 0.0);
  CHECK(oscillation_limit(ExponentFunction::split(2.0, 1.0, 3.0), Weight::power(0.0)) == 1.0);
  const auto three = ExponentFunction({1.0, 2.0}, {2.0, 2.5, 3.0});
  const Weight ends({{0.0, 1.0, 1.0, 0.0}, {2.0, kInf, 1.0, 0.0}});
  CHECK(oscillation_limit(three, ends) == 1.0);
  const Weight middle({{1.2, 1.8, 1.0, 0.0}});
  CHECK(oscillation_limit(three, middle) == 0.0);
}

TEST_CASE("zero oscillation at origin predicate") {
  CHECK(zero_oscillation_at_origin(ExponentFunction::split(2.0, 1.0, 3.0), Weight::power(0.0)));
  CHECK(zero_oscillation_at_origin(ExponentFunction::constant(2.0), Weight::power(0.5)));
  CHECK_FALSE(zero_oscillation_at_origin(ExponentFunction::constant(2.0), Weight({{1.0, 2.0, 1.0, 0.0}})));
}

TEST_CASE("oscillation profile: monotone and saturating on random cases") {
  std::mt19937_64 rng(11);
  std::vector<double> deltas;
  for (int i = 0; i < 50; ++i) deltas.push_back(std::pow(10.0, -2.0 + 4.0 * i / 49.0));
  for (int c = 0; c < 10; ++c) {
    const auto [p, w] = random_case(rng);
    const auto prof = oscillation_profile(p, w, deltas);
    std::optional<double> prev;
    for (const auto& s : prof.samples) {
      if (!s.value) continue;
      if (prev) CHECK(*s.value >= *prev);
      prev = s.value;
    }
    const double sat = oscillation_saturation_radius(p, w);
    for (double d : {sat * 1.0001 + 1e-9, sat + 1.0, 2 * sat + 10.0, 1e6})
      CHECK(*oscillation(p, w, d) == prof.terminal);
  }
}

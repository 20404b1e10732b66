#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "conelab/numeric.hpp"

namespace conelab {

/// Non-negative non-increasing step function on (0, inf) with compact support.
///
/// Takes the value heights[i] on [knots[i-1], knots[i]) (knots[-1] = 0) and 0
/// for x >= knots.back(). The empty function is identically zero.
class DecreasingStep {
 public:
  DecreasingStep() = default;

  DecreasingStep(std::vector<double> knots, std::vector<double> heights)
      : knots_(std::move(knots)), heights_(std::move(heights)) {
    validate();
  }

  static DecreasingStep indicator(double length, double height = 1.0) {
    return DecreasingStep({length}, {height});
  }

  std::span<const double> knots() const { return knots_; }
  std::span<const double> heights() const { return heights_; }
  std::size_t pieces() const { return knots_.size(); }
  bool empty() const { return knots_.empty(); }
  double support_end() const { return knots_.empty() ? 0.0 : knots_.back(); }
  double left_of(std::size_t i) const { return i == 0 ? 0.0 : knots_[i - 1]; }

  bool is_zero() const {
    return std::all_of(heights_.begin(), heights_.end(), [](double h) { return h == 0.0; });
  }

  double operator()(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("DecreasingStep: evaluation point must be > 0");
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    if (it == knots_.end()) return 0.0;
    return heights_[static_cast<std::size_t>(it - knots_.begin())];
  }

  /// Exact \int_a^b f.
  double integrate(double a, double b) const {
    if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("DecreasingStep::integrate: need 0 <= a <= b");
    double sum = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const double lo = std::max(a, left_of(i));
      const double hi = std::min(b, knots_[i]);
      if (hi > lo) sum += heights_[i] * (hi - lo);
      if (knots_[i] >= b) break;
    }
    return sum;
  }

  double total_mass() const { return integrate(0.0, support_end()); }

  /// x -> f(x / factor): stretches the support by `factor`.
  DecreasingStep dilated(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("dilation factor must be > 0");
    auto k = knots_;
    for (auto& t : k) t *= factor;
    return DecreasingStep(std::move(k), heights_);
  }

  DecreasingStep scaled(double c) const {
    if (!(c >= 0.0)) throw std::invalid_argument("scale must be >= 0");
    auto h = heights_;
    for (auto& a : h) a *= c;
    return DecreasingStep(knots_, std::move(h));
  }

  friend bool operator==(const DecreasingStep&, const DecreasingStep&) = default;

 private:
  void validate() const {
    if (knots_.size() != heights_.size())
      throw std::invalid_argument("DecreasingStep: knots and heights differ in length");
    double prev_knot = 0.0;
    double prev_height = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i]) || !(knots_[i] > prev_knot))
        throw std::invalid_argument("DecreasingStep: knots must be finite, positive and strictly increasing");
      if (!std::isfinite(heights_[i]) || heights_[i] < 0.0 || heights_[i] > prev_height)
        throw std::invalid_argument("DecreasingStep: heights must be finite, non-negative and non-increasing");
      prev_knot = knots_[i];
      prev_height = heights_[i];
    }
  }

  std::vector<double> knots_;
  std::vector<double> heights_;
};

/// Radially decreasing function g(|x|) on R^n.
class RadialDecreasingStep {
 public:
  RadialDecreasingStep(int dimension, DecreasingStep profile)
      : dimension_(dimension), profile_(std::move(profile)) {
    if (dimension_ < 1) throw std::invalid_argument("RadialDecreasingStep: dimension must be >= 1");
  }

  int dimension() const { return dimension_; }
  const DecreasingStep& profile() const { return profile_; }

  double at_radius(double rho) const {
    if (rho == 0.0) return profile_.empty() ? 0.0 : profile_.heights().front();
    return profile_(rho);
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dimension_))
      throw std::invalid_argument("RadialDecreasingStep: point has wrong dimension");
    double sq = 0.0;
    for (double c : x) sq += c * c;
    return at_radius(std::sqrt(sq));
  }

  friend bool operator==(const RadialDecreasingStep&, const RadialDecreasingStep&) = default;

 private:
  int dimension_;
  DecreasingStep profile_;
};

struct Range {
  double lo;
  double hi;
};

enum class Spacing { linear, logarithmic };

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sample(std::mt19937_64& rng, Range r, Spacing spacing) {
  const double u = unit_uniform(rng);
  if (spacing == Spacing::logarithmic)
    return std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)));
  return r.lo + u * (r.hi - r.lo);
}

}  // namespace detail

/// Random element of the cone, deterministic in `seed`.
inline DecreasingStep random_decreasing(std::uint64_t seed, std::size_t pieces, Range knot_range,
                                        Range height_range, Spacing knot_spacing = Spacing::linear) {
  if (pieces < 1) throw std::invalid_argument("random_decreasing: need at least one piece");
  if (!(knot_range.lo >= 0.0) || !(knot_range.hi > knot_range.lo) || !std::isfinite(knot_range.hi))
    throw std::invalid_argument("random_decreasing: empty or invalid knot range");
  if (!(height_range.lo >= 0.0) || !(height_range.hi >= height_range.lo) || !std::isfinite(height_range.hi))
    throw std::invalid_argument("random_decreasing: empty or invalid height range");
  if (knot_spacing == Spacing::logarithmic && !(knot_range.lo > 0.0))
    throw std::invalid_argument("random_decreasing: logarithmic spacing needs a positive knot range");

  std::mt19937_64 rng(seed);
  std::vector<double> knots;
  while (knots.size() < pieces) {
    const double t = detail::sample(rng, knot_range, knot_spacing);
    if (t > 0.0) knots.push_back(t);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  }
  std::vector<double> heights(pieces);
  for (auto& h : heights) h = detail::sample(rng, height_range, Spacing::linear);
  std::sort(heights.begin(), heights.end(), std::greater<>());
  return DecreasingStep(std::move(knots), std::move(heights));
}

/// Step approximation of x^{-lambda} on a geometric grid t_min = t_1 < ... < t_m = t_max.
///
/// Cells past the first take the left-endpoint value (a majorant of x^{-lambda});
/// the first cell takes the cell mean t_1^{-lambda}/(1-lambda) when lambda < 1,
/// else t_1^{-lambda}.
inline DecreasingStep power_steps(double lambda, std::size_t pieces, double t_min, double t_max) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("power_steps: lambda must be >= 0");
  if (pieces < 1) throw std::invalid_argument("power_steps: need at least one piece");
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max))
    throw std::invalid_argument("power_steps: need 0 < t_min < t_max < inf");
  std::vector<double> knots(pieces);
  if (pieces == 1) {
    knots[0] = t_max;
  } else {
    const double lmin = std::log(t_min), lmax = std::log(t_max);
    for (std::size_t k = 0; k < pieces; ++k)
      knots[k] = std::exp(lmin + (lmax - lmin) * static_cast<double>(k) / static_cast<double>(pieces - 1));
    knots.front() = t_min;
    knots.back() = t_max;
  }
  std::vector<double> heights(pieces);
  const double first = std::pow(knots[0], -lambda);
  heights[0] = lambda < 1.0 ? first / (1.0 - lambda) : first;
  for (std::size_t k = 1; k < pieces; ++k) heights[k] = std::min(heights[k - 1], std::pow(knots[k - 1], -lambda));
  return DecreasingStep(std::move(knots), std::move(heights));
}

/// Near-extremizer family for Hardy-type inequalities: x^{-lambda} on (0, 1].
inline DecreasingStep power_approximant(double lambda, std::size_t pieces, double t_min = 1e-12) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("power_approximant: lambda must lie in (0, 1)");
  if (!(t_min > 0.0 && t_min < 1.0)) throw std::invalid_argument("power_approximant: t_min must lie in (0, 1)");
  return power_steps(lambda, pieces, t_min, 1.0);
}

}  // namespace conelab

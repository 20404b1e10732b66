#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace conelab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a computation cannot produce a trustworthy finite number:
/// quadrature non-convergence, or divergence where finiteness was required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A non-negative quantity that may legitimately be +infinity.
///
/// Weighted integrals over (0, inf) of power functions diverge for whole
/// parameter ranges, and the weight conditions compare such integrals, so
/// divergence is a value here rather than an error.
class Extended {
 public:
  constexpr Extended() = default;
  constexpr Extended(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr Extended divergent() {
    Extended e;
    e.divergent_ = true;
    return e;
  }

  constexpr bool is_divergent() const { return divergent_; }
  constexpr bool is_finite() const { return !divergent_; }

  /// Throws NumericError when divergent.
  double value() const {
    if (divergent_) throw NumericError("value requested from a divergent quantity");
    return value_;
  }

  /// +inf when divergent.
  constexpr double or_infinity() const {
    return divergent_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr Extended operator+(Extended a, Extended b) {
    if (a.divergent_ || b.divergent_) return divergent();
    return Extended(a.value_ + b.value_);
  }
  Extended& operator+=(Extended other) { return *this = *this + other; }

  /// Scaling by a non-negative factor; 0 * divergent = 0 (measure convention).
  friend constexpr Extended operator*(double c, Extended a) {
    if (c == 0.0) return Extended(0.0);
    if (a.divergent_) return divergent();
    return Extended(c * a.value_);
  }

  friend constexpr bool operator==(const Extended&, const Extended&) = default;

 private:
  double value_ = 0.0;
  bool divergent_ = false;
};

/// Surface area of the unit sphere S^{n-1} in R^n (S^0 = {-1, 1} has measure 2).
inline double unit_sphere_area(int n) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (n == 1) return 2.0;
  if (n == 2) return 2.0 * std::numbers::pi;
  if (n == 3) return 4.0 * std::numbers::pi;
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) { return unit_sphere_area(n) / n; }

/// Exponents this close to -1 are treated as exactly -1 (logarithmic case).
inline constexpr double kLogExponentSlack = 1e-12;

/// Closed form of \int_a^b x^k dx for 0 <= a <= b <= inf (b = inf allowed).
inline Extended power_integral(double a, double b, double k) {
  if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("power_integral: need 0 <= a <= b");
  if (a == b) return 0.0;
  const double k1 = k + 1.0;
  const bool log_case = std::abs(k1) < kLogExponentSlack;
  if (a == 0.0 && (log_case || k1 < 0.0)) return Extended::divergent();
  if (std::isinf(b) && (log_case || k1 > 0.0)) return Extended::divergent();
  if (log_case) return std::log(b / a);
  if (a == 0.0) return std::pow(b, k1) / k1;
  if (std::isinf(b)) return -std::pow(a, k1) / k1;
  // a^{k1} * expm1(k1 log(b/a)) / k1 is accurate when k1 is small
  return std::pow(a, k1) * std::expm1(k1 * std::log(b / a)) / k1;
}

}  // namespace conelab

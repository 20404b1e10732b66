#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "conelab/cone.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/weights.hpp"

namespace conelab {

/// Order alpha of a fractional operator together with where it acts:
/// 0 < alpha < 1 on the half-line, 0 < alpha < n on R^n.
class FractionalOrder {
 public:
  static FractionalOrder half_line(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("FractionalOrder: half-line order must lie in (0, 1), got " + std::to_string(alpha));
    return FractionalOrder(alpha, Geometry::half_line());
  }
  static FractionalOrder radial(double alpha, int n) {
    if (n < 1 || n > 8) throw std::invalid_argument("FractionalOrder: dimension must lie in [1, 8]");
    if (!(alpha > 0.0 && alpha < n))
      throw std::invalid_argument("FractionalOrder: order must lie in (0, n), got " + std::to_string(alpha));
    return FractionalOrder(alpha, Geometry::radial(n));
  }

  double alpha() const { return alpha_; }
  const Geometry& geometry() const { return geometry_; }
  int dimension() const { return geometry_.dimension(); }

 private:
  FractionalOrder(double alpha, Geometry g) : alpha_(alpha), geometry_(g) {}
  double alpha_;
  Geometry geometry_;
};

/// Tf(x) = (1/x) \int_0^x f.
inline double hardy_T(const DecreasingStep& f, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("hardy_T: x must be > 0");
  return f.integrate(0.0, x) / x;
}

/// \int_0^rho t^{n-1} g(t) dt, exact on steps.
inline double radial_mass(const DecreasingStep& g, int n, double rho) {
  double sum = 0.0;
  for (std::size_t i = 0; i < g.pieces(); ++i) {
    const double lo = g.left_of(i);
    if (lo >= rho) break;
    const double hi = std::min(rho, g.knots()[i]);
    sum += g.heights()[i] * (std::pow(hi, n) - std::pow(lo, n));
  }
  return sum / n;
}

/// Hg(x) = |x|^{-n} \int_{|y|<|x|} g(y) dy (not normalized by the ball volume).
inline double hardy_H(const RadialDecreasingStep& g, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("hardy_H: radius must be > 0");
  const int n = g.dimension();
  return unit_sphere_area(n) * radial_mass(g.profile(), n, radius) / std::pow(radius, n);
}

/// R_alpha f(x) = x^{-alpha} \int_0^x f(t) (x - t)^{alpha - 1} dt, piecewise closed form.
inline double riemann_liouville(const DecreasingStep& f, double x, const FractionalOrder& order) {
  if (!(x > 0.0)) throw std::invalid_argument("riemann_liouville: x must be > 0");
  if (order.geometry().is_radial()) throw std::invalid_argument("riemann_liouville: needs a half-line order");
  const double alpha = order.alpha();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double lo = f.left_of(i);
    if (lo >= x) break;
    const double hi = std::min(x, f.knots()[i]);
    const double near = x - hi;  // distance to the right end of the piece
    // (near + width)^alpha - near^alpha without cancellation when x is far out
    const double diff = near == 0.0 ? std::pow(hi - lo, alpha)
                                    : std::pow(near, alpha) * std::expm1(alpha * std::log1p((hi - lo) / near));
    sum += f.heights()[i] * diff;
  }
  return sum / (alpha * std::pow(x, alpha));
}

/// I_alpha g(x) = |x|^{-alpha} \int_{|y|<|x|} g(y) |x - y|^{alpha - n} dy, reduced to radial
/// integrals of rho^{n-1} K_n(|x|, rho, alpha) with the rho = |x| singularity annotated.
inline double frac_integral_I(const RadialDecreasingStep& g, double radius, const FractionalOrder& order,
                              const QuadratureSpec& spec = {}) {
  if (!(radius > 0.0)) throw std::invalid_argument("frac_integral_I: radius must be > 0");
  const int n = g.dimension();
  if (!order.geometry().is_radial() || order.dimension() != n)
    throw std::invalid_argument("frac_integral_I: order dimension does not match the function");
  const double alpha = order.alpha();
  const auto& prof = g.profile();

  QuadratureSpec inner = spec;
  inner.singularities.clear();
  QuadratureSpec at_radius = inner;
  if (alpha < 1.0)
    at_radius = inner.with_singularity(Endpoint::upper, alpha - 1.0);
  else if (alpha == 1.0 && n >= 2)
    at_radius = inner.with_singularity(Endpoint::upper, -0.5);  // logarithmic

  double sum = 0.0;
  for (std::size_t i = 0; i < prof.pieces(); ++i) {
    const double lo = prof.left_of(i);
    if (lo >= radius || prof.heights()[i] == 0.0) break;
    const double hi = std::min(radius, prof.knots()[i]);
    const double offset = radius - hi;
    // gap to the radius measured from the piece's upper end, exact near the singularity
    auto integrand = [&](const Located& p) {
      return std::pow(p.x, n - 1) * angular_kernel_gap(n, radius, p.x, offset + p.from_upper, alpha, spec);
    };
    try {
      const auto r = integrate_adaptive(LocatedIntegrand(integrand), lo, hi, hi == radius ? at_radius : inner);
      sum += prof.heights()[i] * r.value;
    } catch (const QuadratureError& e) {
      throw QuadratureError("frac_integral_I at |x| = " + std::to_string(radius) + ", piece [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "): " + e.what());
    }
  }
  return sum / std::pow(radius, alpha);
}

namespace detail {

// x^a - y^a for x >= y >= 0 given the exact difference x - y.
inline double pow_difference(double x, double y, double diff, double a) {
  if (y == 0.0) return std::pow(x, a);
  return std::pow(y, a) * std::expm1(a * std::log1p(diff / y));
}

// (x^a - x) / (a - 1), continued by x log x at a = 1.
inline double phi_a(double x, double a) {
  if (x == 0.0) return 0.0;
  const double am1 = a - 1.0;
  const double l = std::log(x);
  if (std::abs(am1) < 1e-12) return x * l;
  return x * std::expm1(am1 * l) / am1;
}

// Antiderivative of rho [(R+rho)^{a-1} - (R-rho)^{a-1}] / (a-1) for rho <= R, arranged
// so the a = 1 limit (where the bracket over a-1 becomes a logarithm) is not a 0/0.
inline double prim3(double R, double rho, double a) {
  const double u = R + rho, v = R - rho;
  return (u * phi_a(u, a) - v * phi_a(v, a)) / (a + 1.0) - R * (phi_a(u, a) - phi_a(v, a)) / a +
         2.0 * R * rho / (a * (a + 1.0));
}

// prim3(R, hi) - prim3(R, lo) as a series in rho / R, for hi <= R / 2 where the closed
// form cancels: (1+t)^c - (1-t)^c = 2 sum_{k odd} binom(c, k) t^k with c = a - 1.
inline double prim3_far(double R, double lo, double hi, double a) {
  const double c = a - 1.0;
  const double th = hi / R, tl = lo / R;
  const double lr = tl > 0.0 ? std::log(tl / th) : -kInf;
  double d = 1.0;  // binom(c, k) / c
  double thk = th * th * th;
  double sum = 0.0;
  for (int k = 1; k < 200; k += 2) {
    if (k > 1) {
      d *= (c - k + 2.0) * (c - k + 1.0) / (k * (k - 1.0));
      thk *= th * th;
    }
    const double term = 2.0 * d * thk * -std::expm1((k + 2.0) * lr) / (k + 2.0);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::pow(R, a + 1.0) * sum;
}

}  // namespace detail

/// I_alpha g from closed-form radial antiderivatives of rho^{n-1} K_n, for n in {1, 3}.
inline double frac_integral_I_closed(const RadialDecreasingStep& g, double radius, const FractionalOrder& order) {
  if (!(radius > 0.0)) throw std::invalid_argument("frac_integral_I_closed: radius must be > 0");
  const int n = g.dimension();
  if (n != 1 && n != 3) throw std::invalid_argument("frac_integral_I_closed: needs n = 1 or n = 3");
  if (!order.geometry().is_radial() || order.dimension() != n)
    throw std::invalid_argument("frac_integral_I_closed: order dimension does not match the function");
  const double a = order.alpha();
  const double R = radius;
  const auto& prof = g.profile();
  double sum = 0.0;
  for (std::size_t i = 0; i < prof.pieces(); ++i) {
    const double lo = prof.left_of(i);
    if (lo >= R || prof.heights()[i] == 0.0) break;
    const double hi = std::min(R, prof.knots()[i]);
    const double w = hi - lo;
    double piece;
    if (n == 1) {
      // [(R+rho)^a - (R-rho)^a] / a between lo and hi
      piece = (detail::pow_difference(R + hi, R + lo, w, a) + detail::pow_difference(R - lo, R - hi, w, a)) / a;
    } else {
      const double prim = 2.0 * hi <= R ? detail::prim3_far(R, lo, hi, a)
                                         : detail::prim3(R, hi, a) - detail::prim3(R, lo, a);
      piece = 2.0 * std::numbers::pi / R * prim;
    }
    sum += prof.heights()[i] * piece;
  }
  return sum / std::pow(R, a);
}

enum class SandwichKind { riemann_liouville_vs_T, frac_integral_vs_H };

/// c * (T or H) <= (R_alpha or I_alpha) <= C * (T or H) on the cone.
struct SandwichConstants {
  double lower;
  double upper;
  SandwichKind kind;
  double alpha;
  int dimension;
};

/// Constants assembled from the split of the kernel at half the radius.
///
/// R_alpha vs T: for t < x/2, (x-t)^{alpha-1} <= (x/2)^{alpha-1}, so the near-origin part is
/// at most 2^{1-alpha} Tf(x); the rest is at most f(x/2) x^{-alpha} (x/2)^alpha / alpha and
/// f(x/2) <= 2 Tf(x). Hence C = 2^{1-alpha} (1 + 1/alpha). Since (x-t)^{alpha-1} >= x^{alpha-1}, c = 1.
///
/// I_alpha vs H: on |y| < |x|/2, |x-y| >= |x|/2 gives 2^{n-alpha} Hg. On the shell, g <= g(|x|/2)
/// and the layer-cake bound \int_shell |x-y|^{alpha-n} dy <= V_n |x|^alpha (1 + (n-alpha)/alpha)
/// = V_n |x|^alpha n/alpha, with g(|x|/2) <= 2^n Hg / V_n. Hence C = 2^{n-alpha} + 2^n n / alpha.
/// The lower bound uses |x-y| < 2|x|, giving 2^{alpha-n}; for alpha <= 2 the kernel
/// |x-y|^{alpha-n} is subharmonic in y away from x, and the mean value inequality over balls
/// B(0, t) lifts the lower constant to 1.
inline SandwichConstants sandwich_constants(SandwichKind kind, const FractionalOrder& order) {
  const double a = order.alpha();
  if (kind == SandwichKind::riemann_liouville_vs_T) {
    if (order.geometry().is_radial()) throw std::invalid_argument("sandwich_constants: R_alpha needs a half-line order");
    return {1.0, std::pow(2.0, 1.0 - a) * (1.0 + 1.0 / a), kind, a, 1};
  }
  if (!order.geometry().is_radial()) throw std::invalid_argument("sandwich_constants: I_alpha needs a radial order");
  const int n = order.dimension();
  const double upper = std::pow(2.0, n - a) + std::pow(2.0, n) * n / a;
  const double lower = a <= 2.0 ? 1.0 : std::pow(2.0, a - n);
  return {lower, upper, kind, a, n};
}

}  // namespace conelab

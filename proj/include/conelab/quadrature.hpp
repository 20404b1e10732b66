#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conelab/numeric.hpp"

namespace conelab {

enum class Endpoint { lower, upper };

/// Integrand behaves like |x - endpoint|^exponent times a bounded function.
struct Singularity {
  Endpoint at;
  double exponent;
};

struct QuadratureSpec {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  std::vector<Singularity> singularities;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: tolerances must be > 0");
    if (max_subdivisions < 1) throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
    for (const auto& s : singularities)
      if (!(s.exponent > -1.0)) throw std::invalid_argument("QuadratureSpec: singularity exponent must be > -1");
  }

  QuadratureSpec with_singularity(Endpoint at, double exponent) const {
    auto copy = *this;
    copy.singularities.push_back({at, exponent});
    return copy;
  }
};

struct QuadratureResult {
  double value;
  double error;
  int subdivisions;
};

/// Evaluation point with its exact distances to both ends of the integration
/// interval; integrands singular at an endpoint should use these rather than
/// recomputing x - a, which loses all precision next to the endpoint.
struct Located {
  double x;
  double from_lower;
  double from_upper;
};

using LocatedIntegrand = std::function<double(const Located&)>;

namespace detail {

using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Kronrod and embedded Gauss sums from the library node tables. The error is the
// plain |K - G| with a roundoff floor, which tracks the true panel error far
// better than the library's own estimate near endpoint cusps.
inline Panel apply_rule(const std::function<double(double)>& f, double a, double b) {
  static const auto& nodes = Rule::abscissa();
  static const auto& kw = Rule::weights();
  static const auto& gw = boost::math::quadrature::gauss<double, 10>::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double f0 = f(c);
  double k = kw[0] * f0, g = 0.0, l1 = kw[0] * std::abs(f0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double fl = f(c - h * nodes[i]), fr = f(c + h * nodes[i]);
    k += kw[i] * (fl + fr);
    l1 += kw[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 1) g += gw[i / 2] * (fl + fr);  // odd Kronrod nodes are the Gauss nodes
  }
  k *= h;
  g *= h;
  l1 *= std::abs(h);
  if (!std::isfinite(k)) throw QuadratureError("integrand is not finite on [" + std::to_string(a) + ", " +
                                               std::to_string(b) + "]");
  const double err = std::max(std::abs(k - g), 50.0 * std::numeric_limits<double>::epsilon() * l1);
  return {a, b, k, err};
}

/// Globally adaptive Gauss-Kronrod: always bisects the panel with the largest error.
inline QuadratureResult adaptive_regular(const std::function<double(double)>& f, double a, double b,
                                         const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  panels.push(apply_rule(f, a, b));
  double value = panels.top().value;
  double error = panels.top().error;
  int subdivisions = 1;
  const double ulp_floor = 50.0 * std::numeric_limits<double>::epsilon();
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    if (subdivisions >= spec.max_subdivisions)
      throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                            std::to_string(b) + "]: error estimate " + std::to_string(error) + " after " +
                            std::to_string(subdivisions) + " subdivisions");
    const Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= ulp_floor * std::abs(worst.a)) {
      // Panel cannot be split further; accept it as is.
      if (error - worst.error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) break;
      throw QuadratureError("adaptive quadrature exhausted floating-point resolution near " +
                            std::to_string(worst.a));
    }
    panels.pop();
    const Panel left = apply_rule(f, worst.a, mid);
    const Panel right = apply_rule(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }
  // Re-sum to remove drift from incremental updates.
  double v = 0.0, e = 0.0;
  while (!panels.empty()) {
    v += panels.top().value;
    e += panels.top().error;
    panels.pop();
  }
  return {v, e, subdivisions};
}


/// \int over an interval of length `length` starting at the singular end, with
/// h ~ offset^e there, via offset = u^{1/(1+e)} which makes the integrand bounded.
inline QuadratureResult singular_from(const LocatedIntegrand& h, double a, double b, double length, double e,
                                      bool at_lower, const QuadratureSpec& spec) {
  const double k = 1.0 / (1.0 + e);
  const double total = b - a;
  const double umax = std::pow(length, 1.0 + e);
  auto g = [&](double u) {
    const double offset = std::pow(u, k);
    const Located p = at_lower ? Located{a + offset, offset, total - offset} : Located{b - offset, total - offset, offset};
    return h(p) * k * std::pow(u, k - 1.0);
  };
  return adaptive_regular(g, 0.0, umax, spec);
}

}  // namespace detail

/// \int_a^b f with optional integrable endpoint singularities.
inline QuadratureResult integrate_adaptive(const LocatedIntegrand& f, double a, double b,
                                           const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("integrate_adaptive: need finite a < b");
  std::optional<double> lower, upper;
  for (const auto& s : spec.singularities) {
    if (s.exponent >= 0.0) continue;  // bounded; the regular rule handles it
    auto& slot = s.at == Endpoint::lower ? lower : upper;
    slot = slot ? std::min(*slot, s.exponent) : s.exponent;
  }
  if (!lower && !upper)
    return detail::adaptive_regular([&](double x) { return f(Located{x, x - a, b - x}); }, a, b, spec);
  if (lower && upper) {
    const double half = 0.5 * (b - a);
    const auto l = detail::singular_from(f, a, b, half, *lower, true, spec);
    const auto r = detail::singular_from(f, a, b, half, *upper, false, spec);
    return {l.value + r.value, l.error + r.error, l.subdivisions + r.subdivisions};
  }
  if (lower) return detail::singular_from(f, a, b, b - a, *lower, true, spec);
  return detail::singular_from(f, a, b, b - a, *upper, false, spec);
}

inline QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                           const QuadratureSpec& spec = {}) {
  return integrate_adaptive(LocatedIntegrand([&](const Located& p) { return f(p.x); }), a, b, spec);
}

/// \int_a^inf f for |f(x)| <= bound * x^decay on [a, inf), decay < -1.
///
/// Truncates at X where the analytic remainder bound * X^{decay+1}/|decay+1|
/// drops below half the tolerance, and integrates [a, X] in log x.
inline QuadratureResult integrate_tail(const std::function<double(double)>& f, double decay, double bound, double a,
                                       const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!(decay < -1.0)) throw std::invalid_argument("integrate_tail: decay exponent must be < -1 (else divergent)");
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("integrate_tail: need finite a > 0");
  if (!(bound >= 0.0)) throw std::invalid_argument("integrate_tail: bound must be >= 0");
  if (bound == 0.0) return {0.0, 0.0, 0};
  const double g1 = decay + 1.0;
  const double scale = bound * std::pow(a, g1) / -g1;  // remainder bound at X = a
  const double tail_tol = 0.5 * std::max(spec.abs_tol, spec.rel_tol * scale);
  // bound * X^{g1} / -g1 = tail_tol
  const double X = std::pow(tail_tol * -g1 / bound, 1.0 / g1);
  if (!(X > a)) return {0.0, scale, 0};
  const double remainder = bound * std::pow(X, g1) / -g1;
  auto g = [&](double u) {
    const double x = a * std::exp(u);
    return f(x) * x;
  };
  auto inner = spec;
  inner.singularities.clear();
  inner.abs_tol = std::max(spec.abs_tol, 0.5 * tail_tol);
  const auto r = detail::adaptive_regular(g, 0.0, std::log(X / a), inner);
  return {r.value, r.error + remainder, r.subdivisions};
}

/// K_n(R, rho, alpha) = \int_{S^{n-1}} |R e_1 - rho w|^{alpha - n} dsigma(w) by quadrature over
/// the polar angle, valid for any n >= 2.
/// `gap` is |R - rho|, passed separately so callers can supply it exactly.
inline double angular_kernel_quadrature(int n, double R, double rho, double gap, double alpha,
                                        const QuadratureSpec& spec = {}) {
  if (n < 2) throw std::invalid_argument("angular_kernel_quadrature: needs n >= 2");
  const double e = 0.5 * (alpha - n);
  const double d = gap;
  const double four_r_rho = 4.0 * R * rho;
  auto integrand = [=](double theta) {
    const double s = std::sin(0.5 * theta);
    const double base = d * d + four_r_rho * s * s;
    return std::pow(base, e) * std::pow(std::sin(theta), n - 2);
  };
  const double sphere = unit_sphere_area(n - 1);
  auto local = spec;
  local.singularities.clear();
  if (d == 0.0) {
    if (!(alpha > 1.0)) return kInf;
    return sphere * integrate_adaptive(integrand, 0.0, std::numbers::pi,
                                       local.with_singularity(Endpoint::lower, alpha - 2.0))
                        .value;
  }
  // The integrand peaks in a window of width ~ |R - rho| / sqrt(R rho) around theta = 0.
  const double window = std::min(std::numbers::pi, std::abs(d) / std::sqrt(R * rho));
  double total = 0.0;
  if (window < std::numbers::pi) {
    double lo = 0.0;
    for (double hi = window; lo < std::numbers::pi; hi = std::min(std::numbers::pi, 4.0 * hi)) {
      total += integrate_adaptive(integrand, lo, hi, local).value;
      lo = hi;
    }
  } else {
    total = integrate_adaptive(integrand, 0.0, std::numbers::pi, local).value;
  }
  return sphere * total;
}

inline double angular_kernel_quadrature(int n, double R, double rho, double alpha, const QuadratureSpec& spec = {}) {
  return angular_kernel_quadrature(n, R, rho, std::abs(R - rho), alpha, spec);
}

/// K_n(R, rho, alpha) with |R - rho| = gap supplied by the caller: closed forms for n = 1
/// and n = 3, angular quadrature otherwise.
inline double angular_kernel_gap(int n, double R, double rho, double gap, double alpha,
                                 const QuadratureSpec& spec = {}) {
  if (n < 1 || n > 8) throw std::invalid_argument("angular_kernel: dimension must lie in [1, 8]");
  if (!(alpha > 0.0 && alpha < n)) throw std::invalid_argument("angular_kernel: alpha must lie in (0, n)");
  if (!(R > 0.0) || !(rho >= 0.0)) throw std::invalid_argument("angular_kernel: need R > 0 and rho >= 0");
  if (rho == 0.0) return unit_sphere_area(n) * std::pow(R, alpha - n);
  const double d = gap;
  if (n == 1) {
    const double near = d == 0.0 ? kInf : std::pow(d, alpha - 1.0);
    return near + std::pow(R + rho, alpha - 1.0);
  }
  if (n == 3) {
    // 2 pi / (R rho) * ((R + rho)^{a-1} - |R - rho|^{a-1}) / (a - 1), written to avoid cancellation.
    if (d == 0.0) {
      if (!(alpha > 1.0)) return kInf;
      return 2.0 * std::numbers::pi / (R * rho) * std::pow(2.0 * R, alpha - 1.0) / (alpha - 1.0);
    }
    const double L = std::log1p(2.0 * std::min(R, rho) / d);  // log((R + rho) / |R - rho|)
    const double am1 = alpha - 1.0;
    const double factor = am1 == 0.0 ? L : std::pow(d, am1) * std::expm1(am1 * L) / am1;
    return 2.0 * std::numbers::pi / (R * rho) * factor;
  }
  return angular_kernel_quadrature(n, R, rho, d, alpha, spec);
}

inline double angular_kernel(int n, double R, double rho, double alpha, const QuadratureSpec& spec = {}) {
  return angular_kernel_gap(n, R, rho, std::abs(R - rho), alpha, spec);
}

}  // namespace conelab

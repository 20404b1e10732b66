#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "conelab/numeric.hpp"

namespace conelab {

/// Where functions and weights live: the half-line (0, inf) with Lebesgue
/// measure, or R^n restricted to radial functions (measure sigma_{n-1} rho^{n-1} drho).
class Geometry {
 public:
  static Geometry half_line() { return Geometry(0); }
  static Geometry radial(int n) {
    if (n < 1) throw std::invalid_argument("radial geometry needs dimension >= 1");
    return Geometry(n);
  }

  bool is_radial() const { return dimension_ > 0; }
  /// 1 on the half-line.
  int dimension() const { return dimension_ > 0 ? dimension_ : 1; }
  /// Surface factor of the polar measure; 1 on the half-line.
  double surface() const { return is_radial() ? unit_sphere_area(dimension_) : 1.0; }
  /// Exponent of rho in the polar measure; 0 on the half-line.
  double measure_exponent() const { return is_radial() ? dimension_ - 1.0 : 0.0; }

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  explicit Geometry(int n) : dimension_(n) {}
  int dimension_;
};

/// c * rho^beta on [lo, hi); hi may be infinite.
struct WeightPiece {
  double lo;
  double hi;
  double coefficient;
  double exponent;
  friend bool operator==(const WeightPiece&, const WeightPiece&) = default;
};

/// Piecewise-power weight, zero outside its pieces.
class Weight {
 public:
  Weight(std::vector<WeightPiece> pieces, Geometry geometry = Geometry::half_line())
      : pieces_(std::move(pieces)), geometry_(geometry) {
    std::sort(pieces_.begin(), pieces_.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    double prev_hi = 0.0;
    for (const auto& p : pieces_) {
      if (!(p.lo >= 0.0) || !(p.hi > p.lo) || std::isinf(p.lo))
        throw std::invalid_argument("Weight: piece intervals need 0 <= lo < hi");
      if (!(p.coefficient > 0.0) || !std::isfinite(p.coefficient))
        throw std::invalid_argument("Weight: coefficients must be positive and finite");
      if (!std::isfinite(p.exponent)) throw std::invalid_argument("Weight: exponent must be finite");
      if (p.lo < prev_hi) throw std::invalid_argument("Weight: pieces overlap");
      prev_hi = p.hi;
    }
    if (pieces_.empty()) throw std::invalid_argument("Weight: at least one piece required");
  }

  /// c * x^beta on (0, inf).
  static Weight power(double beta, Geometry geometry = Geometry::half_line(), double coefficient = 1.0) {
    return Weight({{0.0, kInf, coefficient, beta}}, geometry);
  }

  const std::vector<WeightPiece>& pieces() const { return pieces_; }
  const Geometry& geometry() const { return geometry_; }

  double operator()(double x) const {
    for (const auto& p : pieces_)
      if (x >= p.lo && x < p.hi) return p.coefficient * std::pow(x, p.exponent);
    return 0.0;
  }

  /// Piece covering [x, x+) or nullptr.
  const WeightPiece* piece_at(double x) const {
    for (const auto& p : pieces_)
      if (x >= p.lo && x < p.hi) return &p;
    return nullptr;
  }

  /// Support as closed intervals (adjacent pieces merged).
  std::vector<std::pair<double, double>> support() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : pieces_) {
      if (!out.empty() && out.back().second == p.lo)
        out.back().second = p.hi;
      else
        out.emplace_back(p.lo, p.hi);
    }
    return out;
  }

  double support_inf() const { return pieces_.front().lo; }
  double support_sup() const { return pieces_.back().hi; }

  /// All finite interval endpoints.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pieces_) {
      b.push_back(p.lo);
      if (std::isfinite(p.hi)) b.push_back(p.hi);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  /// \int_a^b x^k w(x) dx along the radial variable, no geometry factor.
  Extended moment(double a, double b, double k) const {
    if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("Weight::moment: need 0 <= a <= b");
    Extended total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.lo);
      const double hi = std::min(b, p.hi);
      if (hi > lo) total += p.coefficient * power_integral(lo, hi, p.exponent + k);
    }
    return total;
  }

  friend bool operator==(const Weight&, const Weight&) = default;

 private:
  std::vector<WeightPiece> pieces_;
  Geometry geometry_;
};

/// \int_a^b w in the weight's own measure (n-dimensional for radial weights).
inline Extended weight_integral(const Weight& w, double a, double b) {
  const auto& g = w.geometry();
  return g.surface() * w.moment(a, b, g.measure_exponent());
}

/// Piecewise-constant exponent p(.) on (0, inf): values[j] on [breaks[j-1], breaks[j]).
class ExponentFunction {
 public:
  ExponentFunction(std::vector<double> breaks, std::vector<double> values)
      : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1)
      throw std::invalid_argument("ExponentFunction: need exactly one more value than breakpoints");
    double prev = 0.0;
    for (double b : breaks_) {
      if (!std::isfinite(b) || !(b > prev))
        throw std::invalid_argument("ExponentFunction: breakpoints must be positive, finite and increasing");
      prev = b;
    }
    for (double v : values_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("ExponentFunction: values must satisfy 0 < p < inf");
  }

  static ExponentFunction constant(double p) { return ExponentFunction({}, {p}); }

  /// p = below on (0, at), above on [at, inf).
  static ExponentFunction split(double below, double at, double above) {
    return ExponentFunction({at}, {below, above});
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
  }

  double lo_of(std::size_t j) const { return j == 0 ? 0.0 : breaks_[j - 1]; }
  double hi_of(std::size_t j) const { return j == breaks_.size() ? kInf : breaks_[j]; }

  double p_minus() const { return *std::min_element(values_.begin(), values_.end()); }
  double p_plus() const { return *std::max_element(values_.begin(), values_.end()); }
  bool is_constant() const { return p_minus() == p_plus(); }

  friend bool operator==(const ExponentFunction&, const ExponentFunction&) = default;

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

struct EssentialRange {
  double inf;
  double sup;
};

/// Essential range of p over (lo, hi) intersected with supp w; nullopt when that set is null.
inline std::optional<EssentialRange> essential_range(const ExponentFunction& p, const Weight& w, double lo,
                                                     double hi) {
  std::optional<EssentialRange> out;
  for (const auto& piece : w.pieces()) {
    const double a = std::max(lo, piece.lo);
    const double b = std::min(hi, piece.hi);
    if (!(b > a)) continue;
    for (std::size_t j = 0; j < p.values().size(); ++j) {
      if (std::min(b, p.hi_of(j)) > std::max(a, p.lo_of(j))) {
        const double v = p.values()[j];
        if (!out)
          out = EssentialRange{v, v};
        else
          out = EssentialRange{std::min(out->inf, v), std::max(out->sup, v)};
      }
    }
  }
  return out;
}

/// Local oscillation of p over B(0, delta) (or (0, delta)) intersected with supp w.
/// nullopt when the intersection is null, which is distinct from zero oscillation.
///
/// Both geometries reduce to the radial interval (0, delta) because exponents
/// and weights here are radial.
inline std::optional<double> oscillation(const ExponentFunction& p, const Weight& w, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("oscillation: delta must be > 0");
  const auto r = essential_range(p, w, 0.0, delta);
  if (!r) return std::nullopt;
  return r->sup - r->inf;
}

/// p^+_u - p^-_u over the whole support.
inline double oscillation_limit(const ExponentFunction& p, const Weight& w) {
  const auto r = essential_range(p, w, 0.0, kInf);
  if (!r) throw std::invalid_argument("oscillation_limit: weight has empty support");
  return r->sup - r->inf;
}

/// Delta beyond which the oscillation is frozen at its limit.
inline double oscillation_saturation_radius(const ExponentFunction& p, const Weight& w) {
  double last = 0.0;
  for (const auto& piece : w.pieces()) {
    for (double b : p.breaks())
      if (b > piece.lo && b < piece.hi) last = std::max(last, b);
    last = std::max(last, piece.lo);
    if (std::isfinite(piece.hi)) last = std::max(last, piece.hi);
  }
  return last;
}

/// The standing hypothesis that the oscillation vanishes as delta -> 0+.
///
/// Requires supp w to reach the origin; then p is constant on supp w near 0
/// because it has finitely many pieces, and this is checked directly.
inline bool zero_oscillation_at_origin(const ExponentFunction& p, const Weight& w) {
  if (w.support_inf() > 0.0) return false;
  double first = w.pieces().front().hi;
  if (!p.breaks().empty()) first = std::min(first, p.breaks().front());
  if (std::isinf(first)) first = 1.0;
  const auto phi = oscillation(p, w, 0.5 * first);
  return phi && *phi == 0.0;
}

struct OscillationSample {
  double delta;
  std::optional<double> value;
};

struct OscillationProfile {
  std::vector<OscillationSample> samples;
  double terminal;
};

inline OscillationProfile oscillation_profile(const ExponentFunction& p, const Weight& w,
                                              const std::vector<double>& deltas) {
  OscillationProfile prof{{}, oscillation_limit(p, w)};
  prof.samples.reserve(deltas.size());
  for (double d : deltas) prof.samples.push_back({d, oscillation(p, w, d)});
  return prof;
}

}  // namespace conelab

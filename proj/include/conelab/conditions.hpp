#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conelab/numeric.hpp"
#include "conelab/weights.hpp"

namespace conelab {

enum class ConditionId { br, br_radial, cond5, cond9 };

inline const char* to_string(ConditionId id) {
  switch (id) {
    case ConditionId::br: return "B_r";
    case ConditionId::br_radial: return "B_r-radial";
    case ConditionId::cond5: return "cond5";
    case ConditionId::cond9: return "cond9";
  }
  return "?";
}

enum class Verdict { holds, fails, vacuous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::vacuous: return "vacuous";
  }
  return "?";
}

/// Geometric grid lo, lo*factor, ... up to hi, or an explicit list of values.
struct Sweep {
  double lo = 1e-6;
  double hi = 1e6;
  double factor = 1.7782794100389228;  // 10^{1/4}
  std::optional<std::vector<double>> values;

  static Sweep geometric(double lo, double hi, double factor = 1.7782794100389228) {
    Sweep s;
    s.lo = lo;
    s.hi = hi;
    s.factor = factor;
    return s;
  }

  static Sweep explicit_values(std::vector<double> v) {
    Sweep s;
    s.values = std::move(v);
    return s;
  }

  friend bool operator==(const Sweep&, const Sweep&) = default;

  void validate() const {
    if (values) {
      for (double v : *values)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("Sweep: values must be finite and > 0");
      return;
    }
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw std::invalid_argument("Sweep: need 0 < lo <= hi < inf");
    if (!(factor > 1.0)) throw std::invalid_argument("Sweep: factor must be > 1");
  }

  std::vector<double> points() const {
    validate();
    if (values) {
      auto v = *values;
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    }
    std::vector<double> out;
    const double step = std::log(factor);
    const double span = std::log(hi / lo);
    for (int k = 0; k * step <= span * (1.0 + 1e-12) + 1e-12; ++k) out.push_back(lo * std::exp(k * step));
    return out;
  }
};

struct SweepPoint {
  double r;  // the first parameter; equals s for the one-parameter conditions
  double s;
  Extended lhs;
  Extended rhs;
  double ratio;  // inf when LHS diverges or RHS vanishes; nan when RHS diverges (vacuous point)
};

struct Witness {
  double r;
  double s;
  double ratio;
};

struct ConditionReport {
  ConditionId id;
  Verdict verdict;
  double constant;  // sup of the finite-RHS ratios
  std::optional<Witness> witness;
  std::vector<SweepPoint> points;
  std::string reason;
};

namespace detail {

inline double ratio_of(const Extended& lhs, const Extended& rhs) {
  if (rhs.is_divergent()) return std::nan("");
  if (lhs.is_divergent()) return kInf;
  if (rhs.value() == 0.0) return lhs.value() == 0.0 ? 0.0 : kInf;
  return lhs.value() / rhs.value();
}

// Least-squares slope of log y against log x.
inline std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [x, y] : xy) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= xy.size();
  my /= xy.size();
  double sxx = 0, sxy = 0;
  for (auto [x, y] : xy) {
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
    sxy += (std::log(x) - mx) * (std::log(y) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

inline constexpr double kTrendThreshold = 0.05;

// Growth toward either end of a profile (parameter, sup ratio), judged on the outer decade.
inline std::optional<std::string> trend_failure(const std::vector<std::pair<double, double>>& profile,
                                                const char* name) {
  std::vector<std::pair<double, double>> usable;
  for (auto [x, y] : profile)
    if (y > 0.0 && std::isfinite(y)) usable.push_back({x, y});
  if (usable.size() < 2) return std::nullopt;
  const double lo = usable.front().first, hi = usable.back().first;
  std::vector<std::pair<double, double>> low, high;
  for (auto p : usable) {
    if (p.first <= lo * 10.0 * (1 + 1e-12)) low.push_back(p);
    if (p.first >= hi / 10.0 * (1 - 1e-12)) high.push_back(p);
  }
  if (auto k = loglog_slope(low); k && *k < -kTrendThreshold)
    return std::string("ratio grows as ") + name + " decreases (log-log slope " + std::to_string(*k) + ")";
  if (auto k = loglog_slope(high); k && *k > kTrendThreshold)
    return std::string("ratio grows as ") + name + " increases (log-log slope " + std::to_string(*k) + ")";
  return std::nullopt;
}

inline std::vector<std::pair<double, double>> profile_max(const std::vector<SweepPoint>& pts, bool by_s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) {
    const double key = by_s ? p.s : p.r;
    const double val = std::isnan(p.ratio) ? 0.0 : p.ratio;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == key; });
    if (it == out.end())
      out.push_back({key, val});
    else
      it->second = std::max(it->second, val);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline ConditionReport assemble(ConditionId id, std::vector<SweepPoint> pts, bool two_parameter) {
  ConditionReport rep{id, Verdict::vacuous, 0.0, std::nullopt, std::move(pts), {}};
  bool any_finite_rhs = false;
  for (const auto& p : rep.points) {
    if (std::isnan(p.ratio)) continue;
    any_finite_rhs = true;
    // max with ties broken toward the smaller (r, s)
    if (!rep.witness || p.ratio > rep.witness->ratio ||
        (p.ratio == rep.witness->ratio && std::pair{p.r, p.s} < std::pair{rep.witness->r, rep.witness->s}))
      rep.witness = Witness{p.r, p.s, p.ratio};
  }
  if (!any_finite_rhs) {
    rep.reason = rep.points.empty() ? "empty sweep" : "right-hand side diverges at every swept parameter";
    return rep;
  }
  rep.constant = rep.witness->ratio;
  if (std::isinf(rep.constant)) {
    rep.verdict = Verdict::fails;
    rep.reason = "left-hand side diverges (or right-hand side vanishes) at a swept parameter";
    return rep;
  }
  std::optional<std::string> trend;
  if (two_parameter) {
    trend = trend_failure(profile_max(rep.points, true), "s");
    if (!trend) trend = trend_failure(profile_max(rep.points, false), "r");
  } else {
    trend = trend_failure(profile_max(rep.points, true), "s");
  }
  if (trend) {
    rep.verdict = Verdict::fails;
    rep.reason = *trend;
  } else {
    rep.verdict = Verdict::holds;
    rep.reason = "sup ratio finite with no growth at either end of the sweep";
  }
  return rep;
}

inline void require_radial(const Weight& u, const char* who) {
  if (!u.geometry().is_radial()) throw std::invalid_argument(std::string(who) + ": needs a radial weight");
}

}  // namespace detail

/// Both sides of the B_r condition at s: \int_s^inf (s/x)^r v and \int_0^s v.
inline std::pair<Extended, Extended> br_sides(const Weight& v, double r, double s) {
  return {std::pow(s, r) * v.moment(s, kInf, -r), v.moment(0.0, s, 0.0)};
}

/// Radial B_r at s, both sides with |x|^{r(1-n)} u and the n-dimensional measure.
inline std::pair<Extended, Extended> br_radial_sides(const Weight& u, double r, double s) {
  const int n = u.geometry().dimension();
  const double sigma = u.geometry().surface();
  const double k = r * (1.0 - n) + (n - 1.0);
  return {sigma * std::pow(s, r) * u.moment(s, kInf, k - r), sigma * u.moment(0.0, s, k)};
}

/// Both sides of the variable-exponent condition at (r, s). In dimension n this is the
/// p(x) form of the radial condition; n = 1 gives the half-line one.
inline std::pair<Extended, Extended> variable_sides(const Weight& w, const ExponentFunction& p, double r, double s) {
  const int n = w.geometry().dimension();
  const double sigma = w.geometry().surface();
  Extended lhs = 0.0, rhs = 0.0;
  for (std::size_t j = 0; j < p.values().size(); ++j) {
    const double pj = p.values()[j];
    const double lo = p.lo_of(j), hi = p.hi_of(j);
    if (hi > r) lhs += std::pow(r / s, pj) * w.moment(std::max(lo, r), hi, -n * pj + (n - 1.0));
    if (lo < r) rhs += std::pow(s, -pj) * w.moment(lo, std::min(hi, r), (1.0 - n) * pj + (n - 1.0));
  }
  return {sigma * lhs, sigma * rhs};
}

inline ConditionReport check_Br(const Weight& v, double r, const Sweep& sweep = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("check_Br: r must be > 0");
  if (v.geometry().is_radial()) throw std::invalid_argument("check_Br: needs a half-line weight");
  std::vector<SweepPoint> pts;
  for (double s : sweep.points()) {
    const auto [l, rh] = br_sides(v, r, s);
    pts.push_back({s, s, l, rh, detail::ratio_of(l, rh)});
  }
  return detail::assemble(ConditionId::br, std::move(pts), false);
}

inline ConditionReport check_Br_radial(const Weight& u, double r, const Sweep& sweep = {}) {
  if (!(r > 0.0)) throw std::invalid_argument("check_Br_radial: r must be > 0");
  detail::require_radial(u, "check_Br_radial");
  std::vector<SweepPoint> pts;
  for (double s : sweep.points()) {
    const auto [l, rh] = br_radial_sides(u, r, s);
    pts.push_back({s, s, l, rh, detail::ratio_of(l, rh)});
  }
  return detail::assemble(ConditionId::br_radial, std::move(pts), false);
}

namespace detail {

inline ConditionReport check_variable(ConditionId id, const Weight& w, const ExponentFunction& p, const Sweep& r_sweep,
                                      const Sweep& s_sweep) {
  const auto rs = r_sweep.points();
  const auto ss = s_sweep.points();
  std::vector<SweepPoint> pts;
  pts.reserve(rs.size() * ss.size());
  for (double r : rs)
    for (double s : ss) {
      const auto [l, rh] = variable_sides(w, p, r, s);
      pts.push_back({r, s, l, rh, ratio_of(l, rh)});
    }
  return assemble(id, std::move(pts), true);
}

}  // namespace detail

/// Half-line variable-exponent condition over an (r, s) grid.
inline ConditionReport check_cond5(const Weight& v, const ExponentFunction& p, const Sweep& r_sweep = {},
                                   const Sweep& s_sweep = {}) {
  if (v.geometry().is_radial()) throw std::invalid_argument("check_cond5: needs a half-line weight");
  return detail::check_variable(ConditionId::cond5, v, p, r_sweep, s_sweep);
}

/// Radial variable-exponent condition with p(x) in place of p_0; a half-line weight
/// is read as dimension 1.
inline ConditionReport check_cond9(const Weight& u, const ExponentFunction& p, const Sweep& r_sweep = {},
                                   const Sweep& s_sweep = {}) {
  return detail::check_variable(ConditionId::cond9, u, p, r_sweep, s_sweep);
}

enum class ViolationStatus { found, constant, range_exhausted, vacuous };

inline const char* to_string(ViolationStatus s) {
  switch (s) {
    case ViolationStatus::found: return "found";
    case ViolationStatus::constant: return "constant";
    case ViolationStatus::range_exhausted: return "range-exhausted";
    case ViolationStatus::vacuous: return "vacuous";
  }
  return "?";
}

struct ViolationOptions {
  double factor = 1.7782794100389228;
  double s_min = 1e-12;
  double s_max = 1e12;
};

struct ViolationResult {
  ViolationStatus status = ViolationStatus::constant;
  std::optional<Witness> witness;
  int case_kind = 0;  // 1: p_0 below the sup, s -> 0; 2: p_0 above the inf, s -> inf
  double delta = 0.0;
  std::optional<double> slope;  // log ratio vs log s over the last two decades walked
  std::vector<std::pair<double, double>> path;  // (s, ratio) in walk order
};

/// Walks s geometrically from 1 toward 0 or infinity at r = delta, the radius below which
/// p is frozen at p_0 on supp w, until the condition ratio reaches M. The witness is the
/// first s that does.
inline ViolationResult find_violation(const ExponentFunction& p, const Weight& w, double M,
                                      const ViolationOptions& opt = {}) {
  if (!(M > 1.0)) throw std::invalid_argument("find_violation: M must be > 1");
  if (!(opt.factor > 1.0) || !(opt.s_min > 0.0) || !(opt.s_max > 1.0) || !(opt.s_min < 1.0))
    throw std::invalid_argument("find_violation: need factor > 1 and s_min < 1 < s_max");
  ViolationResult res;
  const auto whole = essential_range(p, w, 0.0, kInf);
  if (!whole || whole->inf == whole->sup) return res;

  // p_0: the value of p on the first cell of supp w
  const double x0 = w.support_inf();
  double x1 = w.pieces().front().hi;
  for (double b : p.breaks())
    if (b > x0) x1 = std::min(x1, b);
  const double p0 = p(std::isinf(x1) ? x0 + 1.0 : 0.5 * (x0 + x1));
  double delta = 0.0;
  for (double b : p.breaks()) {
    const auto below = essential_range(p, w, 0.0, b);
    if (below && below->inf == p0 && below->sup == p0) delta = b;
  }
  if (delta == 0.0) delta = w.pieces().front().hi;
  res.delta = delta;
  res.case_kind = p0 < whole->sup ? 1 : 2;
  const bool down = res.case_kind == 1;

  for (int k = 0;; ++k) {
    const double s = down ? std::pow(opt.factor, -k) : std::pow(opt.factor, k);
    if (down ? s < opt.s_min * (1 - 1e-12) : s > opt.s_max * (1 + 1e-12)) break;
    const auto [l, rh] = variable_sides(w, p, delta, s);
    const double ratio = detail::ratio_of(l, rh);
    if (std::isnan(ratio)) {
      res.status = ViolationStatus::vacuous;
      return res;
    }
    res.path.push_back({s, ratio});
    if (ratio >= M) {
      res.status = ViolationStatus::found;
      res.witness = Witness{delta, s, ratio};
      break;
    }
  }
  if (!res.witness) res.status = ViolationStatus::range_exhausted;
  const double end_s = res.path.empty() ? 1.0 : res.path.back().first;
  std::vector<std::pair<double, double>> tail;
  for (auto [s, q] : res.path)
    if (std::isfinite(q) && q > 0.0 && std::abs(std::log10(s / end_s)) <= 2.0 + 1e-9) tail.push_back({s, q});
  res.slope = detail::loglog_slope(tail);
  return res;
}

}  // namespace conelab

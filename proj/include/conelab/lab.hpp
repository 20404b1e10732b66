#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/conditions.hpp"
#include "conelab/numeric.hpp"
#include "conelab/operators.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/weights.hpp"

namespace conelab {

// ---------------------------------------------------------------------------
// Modular functional

struct ModularValue {
  Extended value;
  std::vector<Extended> per_piece;  // contribution of each weight piece, in weight order
};

namespace detail {

inline void require_geometry(const Weight& w, int dimension, const char* who) {
  const auto& g = w.geometry();
  if (dimension == 0 ? g.is_radial() : (!g.is_radial() || g.dimension() != dimension))
    throw std::invalid_argument(std::string(who) + ": weight geometry does not match the function");
}

inline ModularValue modular_profile(const DecreasingStep& f, const ExponentFunction& p, const Weight& w) {
  const auto& geo = w.geometry();
  const double k = geo.measure_exponent();
  ModularValue out{0.0, std::vector<Extended>(w.pieces().size(), 0.0)};
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double h = f.heights()[i];
    if (h == 0.0) break;
    for (std::size_t j = 0; j < p.values().size(); ++j) {
      const double a = std::max(f.left_of(i), p.lo_of(j));
      const double b = std::min(f.knots()[i], p.hi_of(j));
      if (!(b > a)) continue;
      const double hp = std::pow(h, p.values()[j]);
      for (std::size_t q = 0; q < w.pieces().size(); ++q) {
        const auto& piece = w.pieces()[q];
        const double lo = std::max(a, piece.lo), hi = std::min(b, piece.hi);
        if (!(hi > lo)) continue;
        out.per_piece[q] += geo.surface() * hp * piece.coefficient * power_integral(lo, hi, piece.exponent + k);
      }
    }
  }
  for (const auto& c : out.per_piece) out.value += c;
  return out;
}

}  // namespace detail

/// S_p(f) = \int f^{p(x)} w dx, closed form per cell where f, p and the weight piece are all fixed.
inline ModularValue modular(const DecreasingStep& f, const ExponentFunction& p, const Weight& w) {
  detail::require_geometry(w, 0, "modular");
  return detail::modular_profile(f, p, w);
}

inline ModularValue modular(const RadialDecreasingStep& g, const ExponentFunction& p, const Weight& u) {
  detail::require_geometry(u, g.dimension(), "modular");
  return detail::modular_profile(g.profile(), p, u);
}

// ---------------------------------------------------------------------------
// Operators as a value

enum class OperatorKind { T, H, R, I };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::T: return "T";
    case OperatorKind::H: return "H";
    case OperatorKind::R: return "R";
    case OperatorKind::I: return "I";
  }
  return "?";
}

struct OperatorSpec {
  OperatorKind kind = OperatorKind::T;
  double alpha = 0.0;  // R and I only
  int n = 1;           // H and I only

  static OperatorSpec T() { return {OperatorKind::T, 0.0, 1}; }
  static OperatorSpec H(int n) { return {OperatorKind::H, 0.0, n}; }
  static OperatorSpec R(double alpha) { return {OperatorKind::R, alpha, 1}; }
  static OperatorSpec I(double alpha, int n) { return {OperatorKind::I, alpha, n}; }

  bool radial() const { return kind == OperatorKind::H || kind == OperatorKind::I; }
  // 0 for the half-line, else the dimension
  int geometry_dimension() const { return radial() ? n : 0; }

  void validate() const {
    if (radial() && (n < 1 || n > 8)) throw std::invalid_argument("OperatorSpec: dimension must lie in [1, 8]");
    if (kind == OperatorKind::R) (void)FractionalOrder::half_line(alpha);
    if (kind == OperatorKind::I) (void)FractionalOrder::radial(alpha, n);
  }

  FractionalOrder order() const {
    return kind == OperatorKind::R ? FractionalOrder::half_line(alpha) : FractionalOrder::radial(alpha, n);
  }

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

namespace detail {

/// Evaluates one operator on a fixed profile.
class OperatorEvaluator {
 public:
  OperatorEvaluator(const OperatorSpec& op, const DecreasingStep& f, const QuadratureSpec& spec)
      : op_(op), f_(f), radial_(op.radial() ? std::optional<RadialDecreasingStep>(RadialDecreasingStep(op.n, f))
                                            : std::nullopt),
        spec_(spec), sigma_(op.radial() ? unit_sphere_area(op.n) : 1.0) {
    if (op.kind == OperatorKind::R || op.kind == OperatorKind::I) order_ = op.order();
  }

  double operator()(double x) const {
    switch (op_.kind) {
      case OperatorKind::T: return hardy_T(f_, x);
      case OperatorKind::H: return sigma_ * radial_mass(f_, op_.n, x) / std::pow(x, op_.n);
      case OperatorKind::R: return riemann_liouville(f_, x, *order_);
      case OperatorKind::I:
        return op_.n == 1 || op_.n == 3 ? frac_integral_I_closed(*radial_, x, *order_)
                                        : frac_integral_I(*radial_, x, *order_, spec_);
    }
    return 0.0;
  }

  // Mass seen far away: Tf = F/x, Hg = sigma M / x^n beyond the support.
  double far_mass() const {
    return op_.radial() ? sigma_ * radial_mass(f_, op_.n, f_.support_end()) : f_.total_mass();
  }

  double upper_constant() const {
    switch (op_.kind) {
      case OperatorKind::T:
      case OperatorKind::H: return 1.0;
      case OperatorKind::R: return sandwich_constants(SandwichKind::riemann_liouville_vs_T, *order_).upper;
      case OperatorKind::I: return sandwich_constants(SandwichKind::frac_integral_vs_H, *order_).upper;
    }
    return 1.0;
  }

 private:
  OperatorSpec op_;
  const DecreasingStep& f_;
  std::optional<RadialDecreasingStep> radial_;
  QuadratureSpec spec_;
  double sigma_;
  std::optional<FractionalOrder> order_;
};

// \int_a^b g, in log x when the cell spans a wide ratio.
inline double integrate_cell(const std::function<double(double)>& g, double a, double b, const QuadratureSpec& spec) {
  if (a > 0.0 && b / a > 8.0) {
    auto in_log = [&](double u) {
      const double x = std::exp(u);
      return g(x) * x;
    };
    return integrate_adaptive(in_log, std::log(a), std::log(b), spec).value;
  }
  return integrate_adaptive(g, a, b, spec).value;
}

inline bool small_integer(double p) { return p == std::round(p) && p >= 1.0 && p <= 64.0; }

}  // namespace detail

struct RatioOptions {
  QuadratureSpec spec = [] {
    QuadratureSpec s;
    s.abs_tol = 1e-300;
    s.rel_tol = 1e-9;
    return s;
  }();
  std::optional<double> truncate_at;  // integrate the numerator only over (0, X)
};

/// \int (Op f)^{p(x)} w over (0, inf) (or (0, X) when truncated), in the weight's measure.
inline Extended operator_modular(const OperatorSpec& op, const DecreasingStep& f, const ExponentFunction& p,
                                 const Weight& w, const RatioOptions& opt = {}) {
  op.validate();
  detail::require_geometry(w, op.geometry_dimension(), "operator_modular");
  if (f.is_zero()) return 0.0;
  const double X = opt.truncate_at.value_or(kInf);
  if (!(X > 0.0)) throw std::invalid_argument("operator_modular: truncation point must be > 0");

  const auto& geo = w.geometry();
  const double me = geo.measure_exponent();
  const double sigma = geo.surface();
  const int dim = op.radial() ? op.n : 1;
  const detail::OperatorEvaluator eval(op, f, opt.spec);
  const double t1 = f.knots().front();
  const double tm = f.support_end();

  std::vector<double> cuts{0.0};
  for (double t : f.knots()) cuts.push_back(t);
  for (double b : p.breaks()) cuts.push_back(b);
  for (double b : w.breakpoints()) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  while (!cuts.empty() && cuts.back() >= X) cuts.pop_back();
  cuts.push_back(X);

  Extended total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const double mid = std::isinf(b) ? 2.0 * a + 1.0 : 0.5 * (a + b);
    const WeightPiece* piece = w.piece_at(mid);
    if (!piece) continue;
    const double pj = p(mid);
    const double beta = piece->exponent + me;
    const double coef = sigma * piece->coefficient;

    if (b <= t1) {
      // the operator is constant below the first knot
      const double v = eval(0.5 * std::min(t1, b));
      total += coef * std::pow(v, pj) * power_integral(a, b, beta);
      continue;
    }
    const bool closed = op.kind == OperatorKind::T || op.kind == OperatorKind::H;
    if (a >= tm && closed) {
      total += coef * std::pow(eval.far_mass(), pj) * power_integral(a, b, beta - dim * pj);
      continue;
    }
    if (closed && detail::small_integer(pj)) {
      // Op f = A + B x^{-dim} on the cell; expand the integer power
      const double h = f(mid);
      const double A = op.kind == OperatorKind::T ? h : sigma * h / op.n;
      const double B = op.kind == OperatorKind::T ? f.integrate(0.0, a) - h * a
                                                  : sigma * (radial_mass(f, op.n, a) - h * std::pow(a, op.n) / op.n);
      const int P = static_cast<int>(pj);
      Extended cell = 0.0;
      double binom = 1.0;
      for (int k = 0; k <= P; ++k) {
        if (k > 0) binom = binom * (P - k + 1) / k;
        const double term = binom * std::pow(A, P - k) * std::pow(std::max(B, 0.0), k);
        if (term != 0.0) cell += term * power_integral(a, b, beta - dim * k);
      }
      total += coef * cell;
      continue;
    }
    auto integrand = [&](double x) { return coef * std::pow(eval(x), pj) * std::pow(x, beta); };
    if (std::isinf(b)) {
      const double gamma = beta - dim * pj;
      if (gamma >= -1.0) return Extended::divergent();
      const double bound = coef * std::pow(eval.upper_constant() * eval.far_mass(), pj);
      total += integrate_tail(integrand, gamma, bound, a, opt.spec).value;
      continue;
    }
    total += detail::integrate_cell(integrand, a, b, opt.spec);
  }
  return total;
}

/// modular(Op f) / modular(f).
inline Extended ratio_Q(const DecreasingStep& f, const OperatorSpec& op, const ExponentFunction& p, const Weight& w,
                        const RatioOptions& opt = {}) {
  detail::require_geometry(w, op.geometry_dimension(), "ratio_Q");
  const auto den = detail::modular_profile(f, p, w).value;
  if (den.is_divergent()) throw std::invalid_argument("ratio_Q: the modular of f diverges");
  if (!(den.value() > 0.0)) throw std::invalid_argument("ratio_Q: the modular of f vanishes");
  const auto num = operator_modular(op, f, p, w, opt);
  if (num.is_divergent()) return Extended::divergent();
  return num.value() / den.value();
}

inline Extended ratio_Q(const RadialDecreasingStep& g, const OperatorSpec& op, const ExponentFunction& p,
                        const Weight& u, const RatioOptions& opt = {}) {
  if (!op.radial() || op.n != g.dimension()) throw std::invalid_argument("ratio_Q: operator does not match dimension");
  return ratio_Q(g.profile(), op, p, u, opt);
}

// ---------------------------------------------------------------------------
// Best-constant search

struct SearchOptions {
  std::size_t budget = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  unsigned restarts = 8;
  std::size_t max_pieces = 64;
  Range knot_range{1e-4, 1e4};
  bool structured_seeds = true;
  std::vector<DecreasingStep> extra_seeds;  // evaluated right after the structured ones
  RatioOptions ratio;
};

struct SearchResult {
  double best_ratio = 0.0;  // inf once a divergent candidate is seen
  DecreasingStep argmax;
  std::size_t evaluations = 0;
  std::size_t failed_evaluations = 0;  // numeric failures or inadmissible candidates
  bool divergent = false;
  bool everywhere_divergent = false;
  std::vector<std::pair<std::size_t, double>> trajectory;  // (evaluation, best so far) at each improvement
};

namespace detail {

struct Candidate {
  std::vector<double> log_knots;
  std::vector<double> log_heights;
};

inline DecreasingStep to_step(const Candidate& c) {
  std::vector<double> k(c.log_knots.size()), h(c.log_heights.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(c.log_knots[i]);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::exp(c.log_heights[i]);
  return DecreasingStep(std::move(k), std::move(h));
}

inline std::optional<Candidate> from_step(const DecreasingStep& f) {
  Candidate c;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    if (f.heights()[i] <= 0.0) break;
    c.log_knots.push_back(std::log(f.knots()[i]));
    c.log_heights.push_back(std::log(f.heights()[i]));
  }
  if (c.log_knots.empty()) return std::nullopt;
  return c;
}

// Pool-adjacent-violators: least-squares non-increasing fit.
inline void project_non_increasing(std::vector<double>& y) {
  std::vector<double> val;
  std::vector<std::size_t> len;
  for (double v : y) {
    val.push_back(v);
    len.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] < val.back()) {
      const std::size_t n2 = len.back(), n1 = len[len.size() - 2];
      const double merged = (val[val.size() - 2] * n1 + val.back() * n2) / (n1 + n2);
      val.pop_back();
      len.pop_back();
      val.back() = merged;
      len.back() = n1 + n2;
    }
  }
  std::size_t i = 0;
  for (std::size_t b = 0; b < val.size(); ++b)
    for (std::size_t k = 0; k < len[b]; ++k) y[i++] = val[b];
}

// Sorted, clamped to the range, strictly increasing.
inline void project_knots(std::vector<double>& lk, double lo, double hi) {
  for (auto& v : lk) v = std::clamp(v, lo, hi);
  std::sort(lk.begin(), lk.end());
  const double gap = 1e-9;
  for (std::size_t i = 1; i < lk.size(); ++i) lk[i] = std::max(lk[i], lk[i - 1] + gap);
  // push back inside from the top if the gaps overflowed the range
  if (!lk.empty() && lk.back() > hi + 1e-6) {
    lk.back() = hi;
    for (std::size_t i = lk.size() - 1; i-- > 0;) lk[i] = std::min(lk[i], lk[i + 1] - gap);
  }
}

struct Evaluation {
  double ratio;  // -inf for failures, inf for divergence
  bool failed;
};

inline Evaluation evaluate(const DecreasingStep& f, const OperatorSpec& op, const ExponentFunction& p, const Weight& w,
                           const RatioOptions& opt) {
  try {
    const auto r = ratio_Q(f, op, p, w, opt);
    return {r.or_infinity(), false};
  } catch (const std::exception&) {
    return {-kInf, true};
  }
}

struct StreamResult {
  std::vector<double> ratios;  // one per evaluation, -inf for failures
  double best = -kInf;
  DecreasingStep argmax;
};

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller on the portable uniform
  const double u1 = std::max(unit_uniform(rng), 1e-300), u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// One restart: coordinate ascent in log-knots and log-heights from `start`, re-randomizing
/// around the best point once the step has shrunk. The stream is a fixed sequence of
/// evaluations, so a longer slice only extends it.
inline StreamResult run_stream(std::uint64_t stream_seed, std::size_t slice, const std::optional<Candidate>& start,
                               const OperatorSpec& op, const ExponentFunction& p, const Weight& w,
                               const SearchOptions& opt) {
  StreamResult out;
  if (slice == 0) return out;
  std::mt19937_64 rng(stream_seed);
  const double lo = std::log(opt.knot_range.lo), hi = std::log(opt.knot_range.hi);

  auto random_candidate = [&] {
    static constexpr std::size_t sizes[] = {2, 4, 8, 16, 32};
    const std::size_t m = std::min<std::size_t>(opt.max_pieces, sizes[rng() % 5]);
    Candidate c;
    for (std::size_t i = 0; i < m; ++i) {
      c.log_knots.push_back(lo + (hi - lo) * unit_uniform(rng));
      c.log_heights.push_back(-8.0 * unit_uniform(rng));
    }
    project_knots(c.log_knots, lo, hi);
    std::sort(c.log_heights.begin(), c.log_heights.end(), std::greater<>());
    return c;
  };

  auto score = [&](const Candidate& c) {
    const auto f = to_step(c);
    const auto e = evaluate(f, op, p, w, opt.ratio);
    out.ratios.push_back(e.ratio);
    if (e.ratio > out.best) {
      out.best = e.ratio;
      out.argmax = f;
    }
    return e.ratio;
  };

  Candidate cur = start ? *start : random_candidate();
  double cur_val = score(cur);
  double step = 1.0;
  std::size_t coord = 0;
  bool improved_in_cycle = false;
  while (out.ratios.size() < slice && out.best != kInf) {
    const std::size_t m = cur.log_knots.size();
    const std::size_t ncoord = 2 * m;
    bool moved = false;
    for (double dir : {1.0, -1.0}) {
      if (out.ratios.size() >= slice) break;
      Candidate trial = cur;
      if (coord < m) {
        trial.log_knots[coord] += dir * step;
        project_knots(trial.log_knots, lo, hi);
      } else {
        trial.log_heights[coord - m] += dir * step;
        project_non_increasing(trial.log_heights);
      }
      const double v = score(trial);
      if (v > cur_val) {
        cur = std::move(trial);
        cur_val = v;
        moved = true;
        improved_in_cycle = true;
        break;
      }
    }
    if (!moved) {
      if (++coord >= ncoord) {
        coord = 0;
        if (!improved_in_cycle) step *= 0.5;
        improved_in_cycle = false;
      }
    }
    if (step < 1.0 / 64.0) {
      // jitter the best point (or start afresh) and continue
      if (out.argmax.empty() || unit_uniform(rng) < 0.3) {
        cur = random_candidate();
      } else {
        cur = *from_step(out.argmax);
        for (auto& v : cur.log_knots) v += 0.5 * gaussian(rng);
        for (auto& v : cur.log_heights) v += 0.5 * gaussian(rng);
        project_knots(cur.log_knots, lo, hi);
        project_non_increasing(cur.log_heights);
      }
      if (out.ratios.size() >= slice) break;
      cur_val = score(cur);
      step = 1.0;
      coord = 0;
    }
  }
  return out;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// The structured starting points: indicators chi_(0,s) and power steps near the critical
/// exponent (beta_0 + n) / p_0 of the weight at the origin.
inline std::vector<DecreasingStep> structured_seeds(const ExponentFunction& p, const Weight& w,
                                                    const SearchOptions& opt) {
  std::vector<DecreasingStep> seeds{DecreasingStep::indicator(1.0)};
  for (int k = -4; k <= 4; ++k)
    if (k != 0) seeds.push_back(DecreasingStep::indicator(std::pow(10.0, k)));
  const auto& first = w.pieces().front();
  const double p0 = p(first.lo + 0.5 * (std::min(first.hi, first.lo + 1.0) - first.lo));
  const double beta0 = w.pieces().front().exponent;
  const double n = w.geometry().dimension();
  const double crit = (beta0 + n) / p0;
  if (crit > 0.0) {
    const std::size_t m = std::min<std::size_t>(opt.max_pieces, 64);
    for (double frac : {0.5, 0.8, 0.9, 0.95, 0.98, 1.0})
      seeds.push_back(power_steps(frac * crit, m, opt.knot_range.lo, 1.0));
  }
  return seeds;
}

/// Maximizes ratio_Q over the cone: structured seeds, then a fixed number of restarts
/// sharing the remaining budget. Deterministic in (seed, budget), independent of threads.
inline SearchResult best_constant_search(const OperatorSpec& op, const ExponentFunction& p, const Weight& w,
                                         const SearchOptions& opt = {}) {
  if (opt.budget < 1) throw std::invalid_argument("best_constant_search: budget must be >= 1");
  if (opt.restarts < 1) throw std::invalid_argument("best_constant_search: need at least one restart");
  if (opt.max_pieces < 1 || opt.max_pieces > 64) throw std::invalid_argument("best_constant_search: pieces in [1, 64]");
  if (!(opt.knot_range.lo > 0.0) || !(opt.knot_range.hi > opt.knot_range.lo))
    throw std::invalid_argument("best_constant_search: invalid knot range");
  op.validate();
  detail::require_geometry(w, op.geometry_dimension(), "best_constant_search");

  SearchResult res;
  std::vector<double> log;  // ratio per evaluation in logical order
  double seed_best = -kInf;
  auto record = [&](double r, const DecreasingStep& f) {
    log.push_back(r);
    if (r > seed_best) {
      seed_best = r;
      res.argmax = f;
    }
  };

  std::vector<DecreasingStep> seeds;
  if (opt.structured_seeds) seeds = structured_seeds(p, w, opt);
  for (const auto& s : opt.extra_seeds) seeds.push_back(s);
  for (const auto& s : seeds) {
    if (log.size() >= opt.budget) break;
    record(detail::evaluate(s, op, p, w, opt.ratio).ratio, s);
  }

  const bool diverged_early = std::any_of(log.begin(), log.end(), [](double r) { return std::isinf(r) && r > 0; });
  if (!diverged_early && log.size() < opt.budget) {
    const std::size_t remaining = opt.budget - log.size();
    const auto start = res.argmax.empty() ? std::nullopt : detail::from_step(res.argmax);
    std::vector<detail::StreamResult> streams(opt.restarts);
    std::atomic<unsigned> next{0};
    auto worker = [&] {
      for (unsigned i; (i = next.fetch_add(1)) < opt.restarts;) {
        const std::size_t slice = remaining / opt.restarts + (i < remaining % opt.restarts ? 1 : 0);
        streams[i] = detail::run_stream(detail::mix_seed(opt.seed, i), slice, i == 0 ? start : std::nullopt, op, p, w,
                                        opt);
      }
    };
    const unsigned nthreads = std::max(1u, std::min(opt.threads, opt.restarts));
    if (nthreads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    double best = seed_best;
    for (const auto& s : streams) {
      for (double r : s.ratios) log.push_back(r);
      if (s.best > best) {
        best = s.best;
        res.argmax = s.argmax;
      }
    }
  }

  res.evaluations = log.size();
  double best = -kInf;
  std::size_t finite = 0, divergent = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double r = log[i];
    if (r == -kInf) ++res.failed_evaluations;
    else if (std::isinf(r)) ++divergent;
    else ++finite;
    if (r > best) {
      best = r;
      res.trajectory.push_back({i + 1, r});
    }
  }
  res.divergent = divergent > 0;
  res.everywhere_divergent = divergent > 0 && finite == 0;
  if (res.trajectory.empty() || res.trajectory.back().first != res.evaluations)
    res.trajectory.push_back({res.evaluations, best});
  res.best_ratio = best;
  return res;
}

// ---------------------------------------------------------------------------
// Polar reduction

struct PolarPair {
  Extended lhs;
  Extended rhs_reduced;
  double sigma;        // surface area of the unit sphere
  double tilde_u_exponent_shift;  // u~(t) = t^{shift} sigma u(t)
};

/// lhs = \int_{R^n} (Hg)^r u, computed as an operator modular; rhs = sigma^r \int_0^inf u~ (T g-bar)^r
/// with g-bar(t) = t^{n-1} g(t) and T g-bar by inner quadrature, as an independent path.
inline PolarPair polar_reduce(const RadialDecreasingStep& g, const Weight& u, double r,
                              const QuadratureSpec& spec = [] {
                                QuadratureSpec s;
                                s.abs_tol = 1e-300;
                                s.rel_tol = 1e-11;
                                return s;
                              }()) {
  if (!(r > 0.0)) throw std::invalid_argument("polar_reduce: r must be > 0");
  const int n = g.dimension();
  detail::require_geometry(u, n, "polar_reduce");
  const double sigma = unit_sphere_area(n);
  const double shift = (n - 1.0) * (1.0 - r);
  PolarPair out{0.0, 0.0, sigma, shift};
  const auto& prof = g.profile();
  if (prof.is_zero()) return out;

  RatioOptions ro;
  ro.spec = spec;
  out.lhs = operator_modular(OperatorSpec::H(n), prof, ExponentFunction::constant(r), u, ro);

  // T g-bar(t) = (1/t) \int_0^t s^{n-1} g(s) ds, by quadrature per piece
  auto t_gbar = [&](double t) {
    double m = 0.0;
    for (std::size_t i = 0; i < prof.pieces(); ++i) {
      const double lo = prof.left_of(i);
      if (lo >= t) break;
      const double hi = std::min(t, prof.knots()[i]);
      m += prof.heights()[i] * integrate_adaptive([&](double s) { return std::pow(s, n - 1); }, lo, hi, spec).value;
    }
    return m / t;
  };

  std::vector<double> cuts{0.0};
  for (double t : prof.knots()) cuts.push_back(t);
  for (double b : u.breakpoints()) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(kInf);
  const double mass = t_gbar(prof.support_end()) * prof.support_end();

  Extended rhs = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    const double mid = std::isinf(b) ? 2.0 * a + 1.0 : 0.5 * (a + b);
    const WeightPiece* piece = u.piece_at(mid);
    if (!piece) continue;
    auto integrand = [&](double t) {
      return std::pow(t, shift) * sigma * piece->coefficient * std::pow(t, piece->exponent) * std::pow(t_gbar(t), r);
    };
    if (a == 0.0) {
      // near 0, T g-bar ~ g(0) t^{n-1} / n, so the integrand ~ t^{n-1+beta}
      const double e = n - 1.0 + piece->exponent;
      if (e <= -1.0) {
        rhs = Extended::divergent();
        break;
      }
      auto s = spec;
      if (e < 0.0) s = s.with_singularity(Endpoint::lower, e);
      rhs += integrate_adaptive(integrand, a, b, s).value;
      continue;
    }
    if (std::isinf(b)) {
      const double gamma = shift + piece->exponent - r;
      if (gamma >= -1.0) {
        rhs = Extended::divergent();
        break;
      }
      rhs += integrate_tail(integrand, gamma, sigma * piece->coefficient * std::pow(mass, r), a, spec).value;
      continue;
    }
    rhs += detail::integrate_cell(integrand, a, b, spec);
  }
  out.rhs_reduced = rhs.is_divergent() ? rhs : Extended(std::pow(sigma, r) * rhs.value());
  return out;
}

// ---------------------------------------------------------------------------
// Sandwich equivalence

struct EquivalenceResult {
  double min_ratio;
  double max_ratio;
  SandwichConstants constants;
  bool contained;  // [min, max] within [c, C] up to the tolerance
  std::size_t samples;
};

/// Default sample points: 20 log-spaced points over (0, 2 t_m] and every piece midpoint.
inline std::vector<double> default_samples(const DecreasingStep& f) {
  std::vector<double> xs;
  if (f.empty()) return xs;
  const double top = 2.0 * f.support_end();
  const double bottom = std::min(f.knots()[0], top) / 100.0;
  for (int i = 0; i < 20; ++i) xs.push_back(bottom * std::pow(top / bottom, i / 19.0));
  for (std::size_t i = 0; i < f.pieces(); ++i) xs.push_back(0.5 * (f.left_of(i) + f.knots()[i]));
  return xs;
}

namespace detail {

inline EquivalenceResult summarize(const std::vector<std::pair<double, double>>& pairs, SandwichConstants c,
                                   double tol) {
  EquivalenceResult r{kInf, -kInf, c, true, 0};
  for (auto [op, avg] : pairs) {
    if (!(avg > 0.0)) continue;
    const double q = op / avg;
    r.min_ratio = std::min(r.min_ratio, q);
    r.max_ratio = std::max(r.max_ratio, q);
    ++r.samples;
  }
  if (r.samples > 0) r.contained = r.min_ratio >= c.lower - tol && r.max_ratio <= c.upper + tol;
  return r;
}

}  // namespace detail

/// min and max of R_alpha f / Tf over the samples where Tf > 0.
inline EquivalenceResult equivalence_check(const DecreasingStep& f, const FractionalOrder& order,
                                           std::vector<double> samples = {}, double tol = 1e-10) {
  if (samples.empty()) samples = default_samples(f);
  std::vector<std::pair<double, double>> pairs;
  for (double x : samples) pairs.push_back({riemann_liouville(f, x, order), hardy_T(f, x)});
  return detail::summarize(pairs, sandwich_constants(SandwichKind::riemann_liouville_vs_T, order), tol);
}

/// min and max of I_alpha g / Hg over the sampled radii where Hg > 0.
inline EquivalenceResult equivalence_check(const RadialDecreasingStep& g, const FractionalOrder& order,
                                           std::vector<double> samples = {}, double tol = 1e-6) {
  if (samples.empty()) samples = default_samples(g.profile());
  std::vector<std::pair<double, double>> pairs;
  for (double x : samples) pairs.push_back({frac_integral_I(g, x, order), hardy_H(g, x)});
  return detail::summarize(pairs, sandwich_constants(SandwichKind::frac_integral_vs_H, order), tol);
}

// ---------------------------------------------------------------------------
// Three-way consistency

enum class Empirical { bounded, blow_up, inconclusive };

inline const char* to_string(Empirical e) {
  switch (e) {
    case Empirical::bounded: return "bounded";
    case Empirical::blow_up: return "blow-up";
    case Empirical::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ConsistencyOptions {
  std::size_t budget = 1000;  // the second run doubles it
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double blow_up_threshold = 1e3;
  double stability = 0.05;
};

struct ConsistencyResult {
  bool applicable = false;
  std::string explanation;
  Verdict condition_verdict = Verdict::fails;  // cond5 (half-line) or cond9 (radial)
  bool condition_holds = false;
  bool exponent_constant = false;
  Verdict b_verdict = Verdict::fails;  // B_{p_0}, when p is constant on supp w
  bool structural_holds = false;
  Empirical empirical = Empirical::inconclusive;
  double ratio_budget = 0.0;
  double ratio_double_budget = 0.0;
  bool agree = false;
};

/// Witness seeds (1/s) chi_(0, delta) with s on a decade grid: the indicators that drive a violation.
inline std::vector<DecreasingStep> witness_seeds(const ExponentFunction& p, const Weight& w) {
  double delta = 1.0;
  const auto v = find_violation(p, w, 2.0, ViolationOptions{10.0, 1e-1, 1e1});
  if (v.delta > 0.0 && std::isfinite(v.delta)) delta = v.delta;
  std::vector<DecreasingStep> out;
  for (int k = -6; k <= 6; ++k) out.push_back(DecreasingStep::indicator(delta, std::pow(10.0, -k)));
  return out;
}

inline ConsistencyResult theorem_consistency(const OperatorSpec& op, const ExponentFunction& p, const Weight& w,
                                             const ConsistencyOptions& opt = {}) {
  op.validate();
  detail::require_geometry(w, op.geometry_dimension(), "theorem_consistency");
  ConsistencyResult res;
  if (!zero_oscillation_at_origin(p, w)) {
    res.explanation =
        "the oscillation of p over supp w does not vanish at the origin (or supp w avoids the origin); "
        "the characterizations do not apply";
    return res;
  }
  res.applicable = true;

  const auto cond = op.radial() ? check_cond9(w, p) : check_cond5(w, p);
  res.condition_verdict = cond.verdict;
  res.condition_holds = cond.verdict != Verdict::fails;

  res.exponent_constant = oscillation_limit(p, w) == 0.0;
  if (res.exponent_constant) {
    const double p0 = essential_range(p, w, 0.0, kInf)->inf;
    const auto b = op.radial() ? check_Br_radial(w, p0) : check_Br(w, p0);
    res.b_verdict = b.verdict;
  }
  res.structural_holds = res.exponent_constant && res.b_verdict != Verdict::fails;

  SearchOptions so;
  so.seed = opt.seed;
  so.threads = opt.threads;
  so.extra_seeds = witness_seeds(p, w);
  so.budget = opt.budget;
  const auto first = best_constant_search(op, p, w, so);
  so.budget = 2 * opt.budget;
  const auto second = first.divergent ? first : best_constant_search(op, p, w, so);
  res.ratio_budget = first.best_ratio;
  res.ratio_double_budget = second.best_ratio;
  if (second.divergent || second.best_ratio > opt.blow_up_threshold)
    res.empirical = Empirical::blow_up;
  else if (first.best_ratio > 0.0 && (second.best_ratio - first.best_ratio) / first.best_ratio < opt.stability)
    res.empirical = Empirical::bounded;
  else
    res.empirical = Empirical::inconclusive;

  const bool bounded = res.empirical == Empirical::bounded;
  res.agree = res.empirical != Empirical::inconclusive && res.condition_holds == res.structural_holds &&
              res.structural_holds == bounded;
  std::string ex = std::string("condition ") + to_string(cond.verdict) + "; p " +
                   (res.exponent_constant ? "constant" : "non-constant") + " on supp w";
  if (res.exponent_constant) ex += std::string(", B_{p0} ") + to_string(res.b_verdict);
  ex += std::string("; search ") + to_string(res.empirical);
  res.explanation = ex;
  return res;
}

}  // namespace conelab

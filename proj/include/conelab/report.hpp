#pragma once

// Experiment configurations, reports and curve files for the batch runner.
//
// A config is a JSON object; see README.md for the schema. Every field is
// validated before any computation, and the report echoes the config in
// canonical form so it can be fed back in unchanged.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conelab/lab.hpp"

#ifndef CONELAB_VERSION
#define CONELAB_VERSION "0.0.0"
#endif

namespace conelab::experiment {

using Json = nlohmann::ordered_json;

/// Invalid configuration content; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { sandwich, condition, best_constant, polar, consistency, violation };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::sandwich: return "sandwich";
    case Kind::condition: return "condition";
    case Kind::best_constant: return "best-constant";
    case Kind::polar: return "polar";
    case Kind::consistency: return "consistency";
    case Kind::violation: return "violation";
  }
  return "?";
}

struct WeightSpec {
  int dimension = 0;  // 0 for the half-line
  std::vector<WeightPiece> pieces;

  Weight build() const {
    return Weight(pieces, dimension == 0 ? Geometry::half_line() : Geometry::radial(dimension));
  }
  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

struct ConditionSpec {
  ConditionId id = ConditionId::br;
  double r = 2.0;  // B_r and B_r-radial
  Sweep r_sweep;   // cond5 and cond9
  Sweep s_sweep;
  friend bool operator==(const ConditionSpec&, const ConditionSpec&) = default;
};

struct SearchSpec {
  std::size_t budget = 10000;
  unsigned restarts = 8;
  std::size_t max_pieces = 64;
  double knot_lo = 1e-4;
  double knot_hi = 1e4;
  bool structured_seeds = true;
  std::optional<double> truncate_at;
  friend bool operator==(const SearchSpec&, const SearchSpec&) = default;
};

struct SampleSpec {
  std::size_t functions = 200;
  std::size_t max_pieces = 8;
  friend bool operator==(const SampleSpec&, const SampleSpec&) = default;
};

struct Expectations {
  std::optional<std::string> verdict;  // condition
  std::optional<bool> holds;           // condition: verdict != fails
  std::optional<bool> contained;       // sandwich
  std::optional<double> max_ratio;     // sandwich, best-constant: upper bound
  std::optional<double> min_ratio;     // best-constant: lower bound
  std::optional<double> max_rel_diff;  // polar
  std::optional<bool> agree;           // consistency
  std::optional<std::string> status;   // violation
  std::optional<bool> finite;          // divergence here is a numeric failure
  bool empty() const {
    return !verdict && !holds && !contained && !max_ratio && !min_ratio && !max_rel_diff && !agree && !status &&
           !finite;
  }
  friend bool operator==(const Expectations&, const Expectations&) = default;
};

struct ExperimentConfig {
  Kind kind = Kind::condition;
  std::string name;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tol_abs = 1e-300;
  double tol_rel = 1e-9;
  std::optional<OperatorSpec> op;
  std::optional<WeightSpec> weight;
  std::optional<ExponentFunction> exponent;
  std::optional<ConditionSpec> condition;
  std::optional<SearchSpec> search;
  std::optional<SampleSpec> samples;
  std::optional<double> r;  // polar
  std::optional<double> M;  // violation
  Expectations expect;
  std::string report_file = "report.json";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline Json real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json real(const Extended& v) { return v.is_divergent() ? Json("inf") : real(v.value()); }

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json& at(const char* key) const {
    seen_.push_back(key);
    if (!j_.contains(key)) fail(std::string("missing field '") + key + "'");
    return j_.at(key);
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  double number(const char* key) const { return to_real(at(key), where(key)); }

  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::string string(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  bool boolean(const char* key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::uint64_t unsigned_int(const char* key, std::uint64_t lo, std::uint64_t hi) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(where(key) + ": expected a non-negative integer");
    const auto u = v.get<std::uint64_t>();
    if (u < lo || u > hi)
      throw ConfigError(where(key) + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return u;
  }

  std::vector<double> numbers(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_real(v[i], where(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  Reader object(const char* key) const { return Reader(at(key), where(key)); }

  // Unknown keys are errors, so typos cannot silently fall back to defaults.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError(path_ + ": unknown field '" + it.key() + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

  static double to_real(const Json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
    }
    throw ConfigError(where + ": expected a number (or \"inf\")");
  }

 private:
  const Json& j_;
  std::string path_;
  mutable std::vector<std::string> seen_;
};

inline Kind parse_kind(const std::string& s) {
  for (Kind k : {Kind::sandwich, Kind::condition, Kind::best_constant, Kind::polar, Kind::consistency, Kind::violation})
    if (s == to_string(k)) return k;
  throw ConfigError("kind: unknown experiment kind '" + s + "'");
}

inline OperatorSpec parse_operator(const Reader& r) {
  const auto k = r.string("kind");
  OperatorSpec op;
  if (k == "T") {
    op = OperatorSpec::T();
  } else if (k == "H") {
    op = OperatorSpec::H(static_cast<int>(r.unsigned_int("n", 1, 8)));
  } else if (k == "R") {
    op = OperatorSpec::R(r.number("alpha"));
  } else if (k == "I") {
    const double a = r.number("alpha");
    op = OperatorSpec::I(a, static_cast<int>(r.unsigned_int("n", 1, 8)));
  } else {
    r.fail("operator kind must be one of T, H, R, I");
  }
  r.finish();
  try {
    op.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return op;
}

inline WeightSpec parse_weight(const Reader& r) {
  WeightSpec w;
  w.dimension = r.has("dimension") ? static_cast<int>(r.unsigned_int("dimension", 0, 8)) : 0;
  if (r.has("power")) {
    if (r.has("pieces")) r.fail("give either 'power' or 'pieces'");
    const double c = r.opt_number("coefficient").value_or(1.0);
    w.pieces.push_back({0.0, kInf, c, r.number("power")});
  } else {
    const auto& arr = r.at("pieces");
    if (!arr.is_array()) r.fail("'pieces' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Reader p(arr[i], r.where("pieces") + "[" + std::to_string(i) + "]");
      w.pieces.push_back({p.number("lo"), p.number("hi"), p.number("coefficient"), p.number("exponent")});
      p.finish();
    }
  }
  r.finish();
  try {
    (void)w.build();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return w;
}

inline ExponentFunction parse_exponent(const Reader& r) {
  std::vector<double> breaks, values;
  if (r.has("constant")) {
    values.push_back(r.number("constant"));
  } else {
    breaks = r.numbers("breaks");
    values = r.numbers("values");
  }
  r.finish();
  try {
    return ExponentFunction(std::move(breaks), std::move(values));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

inline Sweep parse_sweep(const Reader& r) {
  Sweep s;
  if (r.has("values")) {
    s = Sweep::explicit_values(r.numbers("values"));
  } else {
    s.lo = r.number("lo");
    s.hi = r.number("hi");
    if (r.has("factor")) s.factor = r.number("factor");
  }
  r.finish();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return s;
}

inline ConditionSpec parse_condition(const Reader& r) {
  ConditionSpec c;
  const auto id = r.string("id");
  if (id == "B_r") c.id = ConditionId::br;
  else if (id == "B_r-radial") c.id = ConditionId::br_radial;
  else if (id == "cond5") c.id = ConditionId::cond5;
  else if (id == "cond9") c.id = ConditionId::cond9;
  else r.fail("condition id must be one of B_r, B_r-radial, cond5, cond9");
  const bool one = c.id == ConditionId::br || c.id == ConditionId::br_radial;
  if (one) {
    c.r = r.number("r");
    if (!(c.r > 0.0) || !std::isfinite(c.r)) r.fail("r must be finite and > 0");
  } else if (r.has("r_sweep")) {
    c.r_sweep = parse_sweep(r.object("r_sweep"));
  }
  if (r.has("s_sweep")) c.s_sweep = parse_sweep(r.object("s_sweep"));
  r.finish();
  return c;
}

inline SearchSpec parse_search(const Reader& r) {
  SearchSpec s;
  if (r.has("budget")) s.budget = r.unsigned_int("budget", 1, 100000000);
  if (r.has("restarts")) s.restarts = static_cast<unsigned>(r.unsigned_int("restarts", 1, 1024));
  if (r.has("max_pieces")) s.max_pieces = r.unsigned_int("max_pieces", 1, 64);
  if (r.has("knot_range")) {
    const auto k = r.numbers("knot_range");
    if (k.size() != 2 || !(k[0] > 0.0) || !(k[1] > k[0]) || !std::isfinite(k[1]))
      r.fail("knot_range must be [lo, hi] with 0 < lo < hi < inf");
    s.knot_lo = k[0];
    s.knot_hi = k[1];
  }
  if (r.has("structured_seeds")) s.structured_seeds = r.boolean("structured_seeds");
  if (r.has("truncate_at")) {
    s.truncate_at = r.number("truncate_at");
    if (!(*s.truncate_at > 0.0)) r.fail("truncate_at must be > 0");
    if (std::isinf(*s.truncate_at)) s.truncate_at.reset();
  }
  r.finish();
  return s;
}

inline SampleSpec parse_samples(const Reader& r) {
  SampleSpec s;
  if (r.has("functions")) s.functions = r.unsigned_int("functions", 1, 100000);
  if (r.has("max_pieces")) s.max_pieces = r.unsigned_int("max_pieces", 1, 64);
  r.finish();
  return s;
}

inline Expectations parse_expect(const Reader& r) {
  Expectations e;
  if (r.has("verdict")) {
    e.verdict = r.string("verdict");
    if (*e.verdict != "holds" && *e.verdict != "fails" && *e.verdict != "vacuous")
      r.fail("verdict must be holds, fails or vacuous");
  }
  if (r.has("holds")) e.holds = r.boolean("holds");
  if (r.has("contained")) e.contained = r.boolean("contained");
  if (r.has("max_ratio")) e.max_ratio = r.number("max_ratio");
  if (r.has("min_ratio")) e.min_ratio = r.number("min_ratio");
  if (r.has("max_rel_diff")) e.max_rel_diff = r.number("max_rel_diff");
  if (r.has("agree")) e.agree = r.boolean("agree");
  if (r.has("status")) {
    e.status = r.string("status");
    bool ok = false;
    for (auto s : {ViolationStatus::found, ViolationStatus::constant, ViolationStatus::range_exhausted,
                   ViolationStatus::vacuous})
      ok = ok || *e.status == to_string(s);
    if (!ok) r.fail("status must be found, constant, range-exhausted or vacuous");
  }
  if (r.has("finite")) e.finite = r.boolean("finite");
  r.finish();
  return e;
}

// Cross-field checks, once everything is parsed.
inline void validate(const ExperimentConfig& c) {
  auto need = [&](bool present, const char* what) {
    if (!present) throw ConfigError(std::string(to_string(c.kind)) + " experiments need '" + what + "'");
  };
  auto forbid = [&](bool present, const char* what) {
    if (present) throw ConfigError(std::string(to_string(c.kind)) + " experiments do not take '" + what + "'");
  };
  auto geometry_matches = [&] {
    if (c.op->geometry_dimension() != c.weight->dimension)
      throw ConfigError("weight.dimension must be " + std::to_string(c.op->geometry_dimension()) + " for operator " +
                        to_string(c.op->kind));
  };
  if (!(c.tol_abs > 0.0) || !std::isfinite(c.tol_abs)) throw ConfigError("tolerance.abs must be finite and > 0");
  if (!(c.tol_rel > 0.0) || !(c.tol_rel < 1.0)) throw ConfigError("tolerance.rel must lie in (0, 1)");
  if (c.threads < 1 || c.threads > 256) throw ConfigError("threads must lie in [1, 256]");
  if (c.report_file.empty() || c.report_file.find('/') != std::string::npos)
    throw ConfigError("output.report must be a plain file name");

  switch (c.kind) {
    case Kind::sandwich:
      need(c.op.has_value(), "operator");
      if (c.op->kind != OperatorKind::R && c.op->kind != OperatorKind::I)
        throw ConfigError("sandwich experiments need operator R or I");
      forbid(c.weight.has_value(), "weight");
      forbid(c.exponent.has_value(), "exponent");
      break;
    case Kind::condition: {
      need(c.weight.has_value(), "weight");
      need(c.condition.has_value(), "condition");
      forbid(c.op.has_value(), "operator");
      const auto id = c.condition->id;
      const bool radial = c.weight->dimension > 0;
      if (id == ConditionId::br && radial) throw ConfigError("B_r needs a half-line weight (dimension 0)");
      if (id == ConditionId::br_radial && !radial) throw ConfigError("B_r-radial needs a radial weight");
      if (id == ConditionId::cond5 && radial) throw ConfigError("cond5 needs a half-line weight (dimension 0)");
      if (id == ConditionId::br || id == ConditionId::br_radial) forbid(c.exponent.has_value(), "exponent");
      else need(c.exponent.has_value(), "exponent");
      break;
    }
    case Kind::best_constant:
    case Kind::consistency:
      need(c.op.has_value(), "operator");
      need(c.weight.has_value(), "weight");
      need(c.exponent.has_value(), "exponent");
      geometry_matches();
      break;
    case Kind::polar:
      need(c.weight.has_value(), "weight");
      need(c.r.has_value(), "r");
      if (c.weight->dimension < 1) throw ConfigError("polar experiments need a radial weight");
      if (!(*c.r > 0.0) || !std::isfinite(*c.r)) throw ConfigError("r must be finite and > 0");
      forbid(c.op.has_value(), "operator");
      break;
    case Kind::violation:
      need(c.weight.has_value(), "weight");
      need(c.exponent.has_value(), "exponent");
      need(c.M.has_value(), "M");
      if (!(*c.M > 1.0) || !std::isfinite(*c.M)) throw ConfigError("M must be finite and > 1");
      forbid(c.op.has_value(), "operator");
      break;
  }
  if (c.kind != Kind::polar) forbid(c.r.has_value(), "r");
  if (c.kind != Kind::violation) forbid(c.M.has_value(), "M");
  if (c.kind != Kind::condition) forbid(c.condition.has_value(), "condition");
  if (c.kind != Kind::best_constant && c.kind != Kind::consistency) forbid(c.search.has_value(), "search");
  if (c.kind != Kind::sandwich && c.kind != Kind::polar) forbid(c.samples.has_value(), "samples");
}

}  // namespace detail

/// Parses and validates a config object; throws ConfigError on any problem.
inline ExperimentConfig parse_config(const Json& j) {
  const detail::Reader r(j, "config");
  ExperimentConfig c;
  c.kind = detail::parse_kind(r.string("kind"));
  if (r.has("name")) c.name = r.string("name");
  if (r.has("seed")) c.seed = r.unsigned_int("seed", 0, UINT64_MAX);
  if (r.has("threads")) c.threads = static_cast<unsigned>(r.unsigned_int("threads", 1, 256));
  if (r.has("tolerance")) {
    const auto t = r.object("tolerance");
    if (t.has("abs")) c.tol_abs = t.number("abs");
    if (t.has("rel")) c.tol_rel = t.number("rel");
    t.finish();
  }
  if (r.has("operator")) c.op = detail::parse_operator(r.object("operator"));
  if (r.has("weight")) c.weight = detail::parse_weight(r.object("weight"));
  if (r.has("exponent")) c.exponent = detail::parse_exponent(r.object("exponent"));
  if (r.has("condition")) c.condition = detail::parse_condition(r.object("condition"));
  if (r.has("search")) c.search = detail::parse_search(r.object("search"));
  if (r.has("samples")) c.samples = detail::parse_samples(r.object("samples"));
  if (r.has("r")) c.r = r.number("r");
  if (r.has("M")) c.M = r.number("M");
  if (r.has("expect")) c.expect = detail::parse_expect(r.object("expect"));
  if (r.has("output")) {
    const auto o = r.object("output");
    if (o.has("report")) c.report_file = o.string("report");
    o.finish();
  }
  r.finish();
  detail::validate(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Canonical form

namespace detail {

inline Json sweep_json(const Sweep& s) {
  Json j;
  if (s.values) {
    j["values"] = Json::array();
    for (double v : *s.values) j["values"].push_back(real(v));
  } else {
    j["lo"] = real(s.lo);
    j["hi"] = real(s.hi);
    j["factor"] = real(s.factor);
  }
  return j;
}

}  // namespace detail

/// The canonical form of a config; parse_config(to_json(c)) == c.
inline Json to_json(const ExperimentConfig& c) {
  using detail::real;
  Json j;
  j["kind"] = to_string(c.kind);
  if (!c.name.empty()) j["name"] = c.name;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["tolerance"] = {{"abs", real(c.tol_abs)}, {"rel", real(c.tol_rel)}};
  if (c.op) {
    Json o;
    o["kind"] = to_string(c.op->kind);
    if (c.op->kind == OperatorKind::R || c.op->kind == OperatorKind::I) o["alpha"] = real(c.op->alpha);
    if (c.op->radial()) o["n"] = c.op->n;
    j["operator"] = o;
  }
  if (c.weight) {
    Json w;
    w["dimension"] = c.weight->dimension;
    w["pieces"] = Json::array();
    for (const auto& p : c.weight->pieces)
      w["pieces"].push_back(
          {{"lo", real(p.lo)}, {"hi", real(p.hi)}, {"coefficient", real(p.coefficient)}, {"exponent", real(p.exponent)}});
    j["weight"] = w;
  }
  if (c.exponent) {
    Json e;
    e["breaks"] = Json::array();
    e["values"] = Json::array();
    for (double b : c.exponent->breaks()) e["breaks"].push_back(real(b));
    for (double v : c.exponent->values()) e["values"].push_back(real(v));
    j["exponent"] = e;
  }
  if (c.condition) {
    Json k;
    k["id"] = to_string(c.condition->id);
    if (c.condition->id == ConditionId::br || c.condition->id == ConditionId::br_radial)
      k["r"] = real(c.condition->r);
    else
      k["r_sweep"] = detail::sweep_json(c.condition->r_sweep);
    k["s_sweep"] = detail::sweep_json(c.condition->s_sweep);
    j["condition"] = k;
  }
  if (c.search) {
    const auto& s = *c.search;
    Json k;
    k["budget"] = s.budget;
    k["restarts"] = s.restarts;
    k["max_pieces"] = s.max_pieces;
    k["knot_range"] = {real(s.knot_lo), real(s.knot_hi)};
    k["structured_seeds"] = s.structured_seeds;
    if (s.truncate_at) k["truncate_at"] = real(*s.truncate_at);
    j["search"] = k;
  }
  if (c.samples) j["samples"] = {{"functions", c.samples->functions}, {"max_pieces", c.samples->max_pieces}};
  if (c.r) j["r"] = real(*c.r);
  if (c.M) j["M"] = real(*c.M);
  if (!c.expect.empty()) {
    const auto& e = c.expect;
    Json k;
    if (e.verdict) k["verdict"] = *e.verdict;
    if (e.holds) k["holds"] = *e.holds;
    if (e.contained) k["contained"] = *e.contained;
    if (e.max_ratio) k["max_ratio"] = real(*e.max_ratio);
    if (e.min_ratio) k["min_ratio"] = real(*e.min_ratio);
    if (e.max_rel_diff) k["max_rel_diff"] = real(*e.max_rel_diff);
    if (e.agree) k["agree"] = *e.agree;
    if (e.status) k["status"] = *e.status;
    if (e.finite) k["finite"] = *e.finite;
    j["expect"] = k;
  }
  j["output"] = {{"report", c.report_file}};
  return j;
}

// ---------------------------------------------------------------------------
// Curves

struct Curve {
  std::string name;  // file suffix
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Locale-independent, 17 significant digits; inf and nan spelled out.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const Curve& c) {
  std::string out;
  for (std::size_t i = 0; i < c.header.size(); ++i) out += (i ? "," : "") + c.header[i];
  out += '\n';
  for (const auto& row : c.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_real(row[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running

/// Divergence where the config declared finiteness; maps to exit status 3.
class FinitenessError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct Outcome {
  Json results;
  std::vector<Curve> curves;
  Json checks = Json::array();
  bool expectations_met = true;
};

namespace detail {

inline void check(Outcome& o, const char* name, const Json& expected, const Json& actual, bool pass) {
  o.checks.push_back({{"name", name}, {"expected", expected}, {"actual", actual}, {"pass", pass}});
  o.expectations_met = o.expectations_met && pass;
}

inline RatioOptions ratio_options(const ExperimentConfig& c) {
  RatioOptions ro;
  ro.spec.abs_tol = c.tol_abs;
  ro.spec.rel_tol = c.tol_rel;
  if (c.search) ro.truncate_at = c.search->truncate_at;
  return ro;
}

inline DecreasingStep sample_function(const ExperimentConfig& c, const SampleSpec& s, std::size_t i) {
  const std::uint64_t seed = conelab::detail::mix_seed(c.seed, i);
  const std::size_t pieces = 1 + seed % s.max_pieces;
  return random_decreasing(seed, pieces, {0.0, 4.0}, {0.0, 3.0});
}

inline Json witness_json(const std::optional<Witness>& w) {
  if (!w) return nullptr;
  return {{"r", real(w->r)}, {"s", real(w->s)}, {"ratio", real(w->ratio)}};
}

inline Outcome run_condition(const ExperimentConfig& c) {
  const auto w = c.weight->build();
  const auto& k = *c.condition;
  ConditionReport rep;
  switch (k.id) {
    case ConditionId::br: rep = check_Br(w, k.r, k.s_sweep); break;
    case ConditionId::br_radial: rep = check_Br_radial(w, k.r, k.s_sweep); break;
    case ConditionId::cond5: rep = check_cond5(w, *c.exponent, k.r_sweep, k.s_sweep); break;
    case ConditionId::cond9: rep = check_cond9(w, *c.exponent, k.r_sweep, k.s_sweep); break;
  }
  const bool one = k.id == ConditionId::br || k.id == ConditionId::br_radial;
  Outcome o;
  o.results = {{"condition", to_string(rep.id)},
               {"verdict", to_string(rep.verdict)},
               {"constant", real(rep.constant)},
               {"witness", witness_json(rep.witness)},
               {"reason", rep.reason},
               {"points", rep.points.size()}};
  Curve curve{"sweep", {}, {}};
  curve.header = one ? std::vector<std::string>{"s", "lhs", "rhs", "ratio"}
                     : std::vector<std::string>{"r", "s", "lhs", "rhs", "ratio"};
  for (const auto& p : rep.points) {
    if (one) curve.rows.push_back({p.s, p.lhs.or_infinity(), p.rhs.or_infinity(), p.ratio});
    else curve.rows.push_back({p.r, p.s, p.lhs.or_infinity(), p.rhs.or_infinity(), p.ratio});
  }
  o.curves.push_back(std::move(curve));

  const auto& e = c.expect;
  if (e.finite && *e.finite && !std::isfinite(rep.constant))
    throw FinitenessError("the condition constant is infinite where finiteness was declared");
  if (e.verdict) check(o, "verdict", *e.verdict, to_string(rep.verdict), *e.verdict == to_string(rep.verdict));
  if (e.holds) {
    const bool holds = rep.verdict != Verdict::fails;
    check(o, "holds", *e.holds, holds, *e.holds == holds);
  }
  return o;
}

inline Outcome run_sandwich(const ExperimentConfig& c) {
  const SampleSpec s = c.samples.value_or(SampleSpec{});
  const auto order = c.op->order();
  const bool radial = c.op->kind == OperatorKind::I;
  Outcome o;
  Curve curve{"functions", {"index", "min_ratio", "max_ratio"}, {}};
  double lo = kInf, hi = -kInf;
  bool contained = true;
  std::size_t samples = 0;
  SandwichConstants k{};
  for (std::size_t i = 0; i < s.functions; ++i) {
    const auto f = sample_function(c, s, i);
    const auto r = radial ? equivalence_check(RadialDecreasingStep(c.op->n, f), order) : equivalence_check(f, order);
    k = r.constants;
    if (r.samples == 0) continue;
    lo = std::min(lo, r.min_ratio);
    hi = std::max(hi, r.max_ratio);
    contained = contained && r.contained;
    samples += r.samples;
    curve.rows.push_back({static_cast<double>(i), r.min_ratio, r.max_ratio});
  }
  o.results = {{"operator", radial ? "I_alpha vs H" : "R_alpha vs T"},
               {"alpha", real(c.op->alpha)},
               {"n", radial ? c.op->n : 1},
               {"lower", real(k.lower)},
               {"upper", real(k.upper)},
               {"min_ratio", real(lo)},
               {"max_ratio", real(hi)},
               {"contained", contained},
               {"functions", s.functions},
               {"samples", samples}};
  o.curves.push_back(std::move(curve));
  const auto& e = c.expect;
  if (e.contained) check(o, "contained", *e.contained, contained, *e.contained == contained);
  if (e.max_ratio) check(o, "max_ratio", real(*e.max_ratio), real(hi), hi <= *e.max_ratio);
  return o;
}

inline SearchOptions search_options(const ExperimentConfig& c) {
  const SearchSpec s = c.search.value_or(SearchSpec{});
  SearchOptions so;
  so.budget = s.budget;
  so.seed = c.seed;
  so.threads = c.threads;
  so.restarts = s.restarts;
  so.max_pieces = s.max_pieces;
  so.knot_range = {s.knot_lo, s.knot_hi};
  so.structured_seeds = s.structured_seeds;
  so.ratio = ratio_options(c);
  return so;
}

inline Outcome run_best_constant(const ExperimentConfig& c) {
  const auto w = c.weight->build();
  const auto res = best_constant_search(*c.op, *c.exponent, w, search_options(c));
  Outcome o;
  Json knots = Json::array(), heights = Json::array(), traj = Json::array();
  for (double t : res.argmax.knots()) knots.push_back(real(t));
  for (double h : res.argmax.heights()) heights.push_back(real(h));
  Curve curve{"trajectory", {"evaluations", "best_ratio"}, {}};
  for (const auto& [n, r] : res.trajectory) {
    traj.push_back({n, real(r)});
    curve.rows.push_back({static_cast<double>(n), r});
  }
  o.results = {{"best_ratio", real(res.best_ratio)},
               {"evaluations", res.evaluations},
               {"failed_evaluations", res.failed_evaluations},
               {"divergent", res.divergent},
               {"everywhere_divergent", res.everywhere_divergent},
               {"argmax", {{"knots", knots}, {"heights", heights}}},
               {"trajectory", traj}};
  o.curves.push_back(std::move(curve));
  const auto& e = c.expect;
  if (e.finite && *e.finite && res.divergent)
    throw FinitenessError("the search met a divergent ratio where finiteness was declared");
  if (e.min_ratio)
    check(o, "min_ratio", real(*e.min_ratio), real(res.best_ratio), res.best_ratio >= *e.min_ratio);
  if (e.max_ratio)
    check(o, "max_ratio", real(*e.max_ratio), real(res.best_ratio), res.best_ratio <= *e.max_ratio);
  return o;
}

inline Outcome run_polar(const ExperimentConfig& c) {
  const auto u = c.weight->build();
  const SampleSpec s = c.samples.value_or(SampleSpec{20, 6});
  QuadratureSpec spec;
  spec.abs_tol = c.tol_abs;
  spec.rel_tol = std::min(c.tol_rel, 1e-11);
  Outcome o;
  Curve curve{"cases", {"index", "lhs", "rhs_reduced"}, {}};
  Json cases = Json::array();
  double worst = 0.0;
  bool divergent = false, asymmetric = false;
  PolarPair last{};
  for (std::size_t i = 0; i < s.functions; ++i) {
    const RadialDecreasingStep g(u.geometry().dimension(), sample_function(c, s, i));
    last = polar_reduce(g, u, *c.r, spec);
    const double l = last.lhs.or_infinity(), r = last.rhs_reduced.or_infinity();
    if (last.lhs.is_divergent() != last.rhs_reduced.is_divergent()) asymmetric = true;
    if (std::isinf(l) || std::isinf(r)) divergent = true;
    else if (l > 0.0) worst = std::max(worst, std::abs(l - r) / l);
    cases.push_back({real(l), real(r)});
    curve.rows.push_back({static_cast<double>(i), l, r});
  }
  o.results = {{"sigma", real(last.sigma)},
               {"tilde_u_exponent_shift", real(last.tilde_u_exponent_shift)},
               {"max_rel_diff", real(worst)},
               {"divergent", divergent},
               {"symmetric_divergence", !asymmetric},
               {"cases", cases}};
  o.curves.push_back(std::move(curve));
  const auto& e = c.expect;
  if (e.finite && *e.finite && divergent) throw FinitenessError("a polar pair diverged where finiteness was declared");
  if (e.max_rel_diff)
    check(o, "max_rel_diff", real(*e.max_rel_diff), real(worst), worst <= *e.max_rel_diff && !asymmetric);
  return o;
}

inline Outcome run_consistency(const ExperimentConfig& c) {
  const auto w = c.weight->build();
  ConsistencyOptions co;
  co.seed = c.seed;
  co.threads = c.threads;
  if (c.search) co.budget = c.search->budget;
  const auto res = theorem_consistency(*c.op, *c.exponent, w, co);
  Outcome o;
  o.results = {{"applicable", res.applicable},
               {"explanation", res.explanation},
               {"condition_verdict", to_string(res.condition_verdict)},
               {"condition_holds", res.condition_holds},
               {"exponent_constant", res.exponent_constant},
               {"b_verdict", res.exponent_constant ? Json(to_string(res.b_verdict)) : Json(nullptr)},
               {"structural_holds", res.structural_holds},
               {"empirical", to_string(res.empirical)},
               {"ratio_budget", real(res.ratio_budget)},
               {"ratio_double_budget", real(res.ratio_double_budget)},
               {"agree", res.agree}};
  if (c.expect.agree) check(o, "agree", *c.expect.agree, res.agree, *c.expect.agree == res.agree);
  return o;
}

inline Outcome run_violation(const ExperimentConfig& c) {
  const auto res = find_violation(*c.exponent, c.weight->build(), *c.M);
  Outcome o;
  Curve curve{"path", {"s", "ratio"}, {}};
  for (const auto& [s, r] : res.path) curve.rows.push_back({s, r});
  o.results = {{"status", to_string(res.status)},
               {"case", res.case_kind},
               {"delta", real(res.delta)},
               {"slope", res.slope ? real(*res.slope) : Json(nullptr)},
               {"witness", witness_json(res.witness)},
               {"steps", res.path.size()}};
  o.curves.push_back(std::move(curve));
  if (c.expect.status)
    check(o, "status", *c.expect.status, to_string(res.status), *c.expect.status == to_string(res.status));
  return o;
}

}  // namespace detail

/// Runs the experiment. Throws FinitenessError, NumericError or QuadratureError on numeric failure.
inline Outcome run(const ExperimentConfig& c) {
  switch (c.kind) {
    case Kind::sandwich: return detail::run_sandwich(c);
    case Kind::condition: return detail::run_condition(c);
    case Kind::best_constant: return detail::run_best_constant(c);
    case Kind::polar: return detail::run_polar(c);
    case Kind::consistency: return detail::run_consistency(c);
    case Kind::violation: return detail::run_violation(c);
  }
  return {};
}

/// The report document. Only provenance.wall_time_s varies between identical runs.
inline Json make_report(const ExperimentConfig& c, const Outcome& o, double wall_time) {
  Json j;
  j["config"] = to_json(c);
  j["results"] = o.results;
  if (!c.expect.empty()) j["expectations"] = {{"passed", o.expectations_met}, {"checks", o.checks}};
  j["provenance"] = {{"tool", "conelab"}, {"version", CONELAB_VERSION}, {"seed", c.seed}, {"wall_time_s", wall_time}};
  return j;
}

}  // namespace conelab::experiment

#pragma once

// Command-line front end of the batch runner.
//
// Exit status: 0 success, 2 invalid arguments or config (nothing written),
// 3 numeric failure or unwritable output, 4 a declared expectation failed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conelab/report.hpp"

namespace conelab::experiment {

enum ExitStatus : int { kOk = 0, kInvalid = 2, kNumeric = 3, kMismatch = 4 };

struct CliOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_abs;
  std::optional<double> tol_rel;
  std::optional<std::size_t> budget;
  std::optional<unsigned> threads;
  bool emit_csv = false;
};

namespace detail {

inline bool write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) return false;
  os << body;
  return static_cast<bool>(os.flush());
}

// Command-line overrides go into the config itself, so the echo reproduces the run.
inline void apply_overrides(ExperimentConfig& c, const CliOptions& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.tol_abs) c.tol_abs = *o.tol_abs;
  if (o.tol_rel) c.tol_rel = *o.tol_rel;
  if (o.threads) c.threads = *o.threads;
  if (o.budget) {
    if (c.kind != Kind::best_constant && c.kind != Kind::consistency)
      throw ConfigError("--budget applies to best-constant and consistency experiments only");
    if (!c.search) c.search = SearchSpec{};
    c.search->budget = *o.budget;
  }
}

}  // namespace detail

/// Runs one experiment as the command line describes; returns the exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"conelab: weighted Hardy-type inequalities on the cone of decreasing functions"};
  CliOptions o;
  app.add_option("--config", o.config, "experiment config (JSON)")->required();
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--seed", o.seed, "seed, overriding the config");
  app.add_option("--tol-abs", o.tol_abs, "absolute quadrature tolerance");
  app.add_option("--tol-rel", o.tol_rel, "relative quadrature tolerance");
  app.add_option("--budget", o.budget, "search budget (evaluations)");
  app.add_option("--threads", o.threads, "worker threads");
  app.add_flag("--emit-csv", o.emit_csv, "write one CSV per curve next to the report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "conelab: " << e.what() << '\n';
    return kInvalid;
  }

  ExperimentConfig cfg;
  try {
    std::ifstream is(o.config, std::ios::binary);
    if (!is) throw ConfigError("cannot read config '" + o.config + "'");
    std::ostringstream text;
    text << is.rdbuf();
    cfg = parse_config(text.str());
    detail::apply_overrides(cfg, o);
    cfg = parse_config(to_json(cfg));  // re-validate with the overrides in place
  } catch (const ConfigError& e) {
    err << "conelab: invalid config: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "conelab: invalid config: " << e.what() << '\n';
    return kInvalid;
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = run(cfg);
  } catch (const std::invalid_argument& e) {
    err << "conelab: invalid experiment: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "conelab: numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(o.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto report_path = dir / cfg.report_file;
  if (!detail::write_file(report_path, make_report(cfg, outcome, wall).dump(2) + "\n")) {
    err << "conelab: cannot write " << report_path.string() << '\n';
    return kNumeric;
  }
  if (o.emit_csv) {
    const auto stem = std::filesystem::path(cfg.report_file).stem().string();
    for (const auto& curve : outcome.curves) {
      const auto path = dir / (stem + "_" + curve.name + ".csv");
      if (!detail::write_file(path, to_csv(curve))) {
        err << "conelab: cannot write " << path.string() << '\n';
        return kNumeric;
      }
    }
  }
  out << to_string(cfg.kind) << ": report written to " << report_path.string() << '\n';
  if (!outcome.expectations_met) {
    err << "conelab: expectation mismatch\n";
    for (const auto& c : outcome.checks)
      if (!c["pass"].get<bool>()) err << "  " << c["name"].get<std::string>() << ": expected " << c["expected"].dump()
                                      << ", got " << c["actual"].dump() << '\n';
    return kMismatch;
  }
  return kOk;
}

}  // namespace conelab::experiment

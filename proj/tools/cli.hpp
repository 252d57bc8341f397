#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmvno/cmvno.hpp"

namespace cmvno::cli {

enum Exit : int { kOk = 0, kVerificationFailed = 1, kUsage = 2, kIo = 3 };

namespace detail {

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

inline Failure usage(std::string msg) { return {kUsage, "usage", std::move(msg)}; }

inline int report(std::ostream& err, const Failure& f) {
  err << nlohmann::json{{"kind", f.kind}, {"message", f.message}}.dump() << '\n';
  return f.code;
}

struct Range {
  SweepAxis axis;
  std::vector<double> grid;
};

inline double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw usage("cannot read " + what + " from '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) throw usage("cannot read " + what + " from '" + text + "'");
  return v;
}

/// "axis=lo:hi:step", inclusive of hi up to rounding.
inline Range parse_range(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw usage("--vary expects axis=lo:hi:step, got '" + spec + "'");
  const auto axis = parse_sweep_axis(spec.substr(0, eq));
  if (!axis) throw usage("unknown sweep axis '" + spec.substr(0, eq) + "' (use cs, cl or alpha)");
  std::vector<std::string> parts;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw usage("--vary expects axis=lo:hi:step, got '" + spec + "'");
  const double lo = parse_double(parts[0], "range start");
  const double hi = parse_double(parts[1], "range end");
  const double step = parse_double(parts[2], "range step");
  if (step <= 0.0) throw usage("range step must be positive");
  if (lo > hi) throw usage("empty range: start exceeds end");
  if (*axis == SweepAxis::Alpha && (lo < 0.0 || hi > 1.0)) throw usage("alpha range must lie in [0,1]");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 10'000'000) throw usage("range has too many points");
  Range r{*axis, {}};
  r.grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) r.grid.push_back(lo + static_cast<double>(i) * step);
  return r;
}

inline Scenario read_config(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw Failure{kIo, "io", "cannot read config file '" + path + "'"};
  return load_scenario(path);
}

/// Writes `text` to `path`, or to `out` when no path is given.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Failure{kIo, "io", "cannot write '" + path + "'"};
  file << text;
  file.flush();
  if (!file) throw Failure{kIo, "io", "write to '" + path + "' failed"};
}

inline nlohmann::json solve_json(const Scenario& s, double alpha) {
  const auto sensing = stage1_sense(s);
  const auto eq = equilibrium_at(s, sensing, alpha);
  const auto base = baseline_outcome(s);
  nlohmann::json users = nlohmann::json::array();
  for (std::size_t i = 0; i < s.users().size(); ++i) {
    const auto& d = eq.per_user[i];
    users.push_back({{"g", round_12(s.users()[i].g())},
                     {"w", round_12(d.w)},
                     {"snr", round_12(d.snr)},
                     {"payoff", round_12(d.payoff)}});
  }
  return {{"G", round_12(s.G())},
          {"snr_model", s.snr_model() == SnrModel::HighSnr ? "high" : "general"},
          {"alpha", round_12(alpha)},
          {"b_s", round_12(eq.b_s)},
          {"b_l", round_12(eq.b_l)},
          {"pi", round_12(eq.pi)},
          {"profit_realized", round_12(eq.operator_profit_realized)},
          {"profit_expected", round_12(sensing.expected_profit)},
          {"baseline_pi", round_12(base.pi)},
          {"baseline_profit", round_12(base.profit)},
          {"sensing_regime", to_string(eq.sensing_regime)},
          {"lease_case", to_string(eq.lease_case)},
          {"pricing_regime", to_string(eq.pricing_regime)},
          {"snr_common", round_12(eq.snr_common)},
          {"users", users}};
}

/// Closed forms with a deliberately wrong sensing stage, for the negative control.
inline oracle::ClosedForms corrupted_forms() {
  oracle::ClosedForms cf;
  cf.sense = [](const Scenario& s) {
    auto d = stage1_sense(s);
    d.b_s_star = 1.5 * d.b_s_star + 0.05 * s.G();
    d.expected_profit *= 1.1;
    return d;
  };
  return cf;
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrum market equilibrium solver for a cognitive virtual operator", "cmvno"};
  app.require_subcommand(1);

  std::string config;
  std::optional<double> alpha;
  auto* solve = app.add_subcommand("solve", "solve the market and print the equilibrium as JSON");
  solve->add_option("config", config, "scenario JSON")->required();
  solve->add_option("--alpha", alpha, "realized sensing yield in [0,1] (default: distribution mean)");

  std::vector<std::string> vary;
  std::string out_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one or two parameters and write CSV");
  sweep_cmd->add_option("config", config, "scenario JSON")->required();
  sweep_cmd->add_option("--vary", vary, "axis=lo:hi:step with axis one of cs, cl, alpha")->required();
  sweep_cmd->add_option("--alpha", alpha, "realization for the per-slot columns");
  sweep_cmd->add_option("--out", out_path, "output CSV (default: stdout)");

  long long slots = 50;
  long long seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run a multi-slot market and write the trace CSV");
  simulate->add_option("config", config, "scenario JSON")->required();
  simulate->add_option("--slots", slots, "number of slots");
  simulate->add_option("--seed", seed, "random seed");
  simulate->add_option("--out", out_path, "output CSV (default: stdout)");

  long long density = 10000;
  long long samples = 100000;
  long long random_count = 0;
  bool corrupt = false;
  auto* check = app.add_subcommand("check", "verify the solver against brute-force search");
  check->add_option("config", config, "scenario JSON")->required();
  check->add_option("--grid-density", density, "grid points per search (>= 1000)");
  check->add_option("--mc-samples", samples, "Monte-Carlo samples (>= 10000)");
  check->add_option("--seed", seed, "random seed");
  check->add_option("--random", random_count, "extra random scenarios sharing the config's alpha and model");
  check->add_flag("--corrupt-fixture", corrupt)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return detail::report(err, detail::usage(e.what()));
  }

  try {
    if (*solve) {
      if (alpha && (*alpha < 0.0 || *alpha > 1.0)) throw detail::usage("--alpha must lie in [0,1]");
      const auto s = detail::read_config(config);
      out << detail::solve_json(s, alpha.value_or(s.alpha().mean())).dump(2) << '\n';
      return kOk;
    }
    if (*sweep_cmd) {
      if (vary.size() > 2) throw detail::usage("at most two --vary axes");
      if (alpha && (*alpha < 0.0 || *alpha > 1.0)) throw detail::usage("--alpha must lie in [0,1]");
      std::vector<detail::Range> ranges;
      for (const auto& v : vary) ranges.push_back(detail::parse_range(v));
      if (ranges.size() == 2 && ranges[0].axis == ranges[1].axis) throw detail::usage("--vary axes overlap");
      const auto s = detail::read_config(config);
      const SweepOptions opts{alpha};
      const auto rows = ranges.size() == 1
                            ? sweep(s, ranges[0].axis, ranges[0].grid, opts)
                            : sweep(s, ranges[0].axis, ranges[0].grid, ranges[1].axis, ranges[1].grid, opts);
      std::ostringstream csv;
      write_sweep_csv(csv, rows);
      detail::emit(csv.str(), out_path, out);
      return kOk;
    }
    if (*simulate) {
      if (slots < 1) throw detail::usage("--slots must be at least 1");
      if (seed < 0) throw detail::usage("--seed must be non-negative");
      const auto s = detail::read_config(config);
      const auto trace = cmvno::run(s, static_cast<std::size_t>(slots), static_cast<std::uint64_t>(seed));
      std::ostringstream csv;
      write_trace_csv(csv, trace);
      detail::emit(csv.str(), out_path, out);
      return kOk;
    }
    if (density < 1000) throw detail::usage("--grid-density must be at least 1000");
    if (samples < 10000) throw detail::usage("--mc-samples must be at least 10000");
    if (seed < 0) throw detail::usage("--seed must be non-negative");
    if (random_count < 0) throw detail::usage("--random must be non-negative");
    const auto s = detail::read_config(config);
    std::vector<Scenario> batch{s};
    for (auto& r : oracle::random_scenarios(static_cast<std::size_t>(random_count), static_cast<std::uint64_t>(seed),
                                            s.alpha(), s.snr_model())) {
      batch.push_back(std::move(r));
    }
    oracle::Budgets budgets;
    budgets.grid_density = static_cast<std::size_t>(density);
    budgets.mc_samples = static_cast<std::size_t>(samples);
    budgets.seed = static_cast<std::uint64_t>(seed);
    const auto forms = corrupt ? detail::corrupted_forms() : oracle::ClosedForms{};
    const auto reports = oracle::end_to_end_check(batch, budgets, forms);
    for (const auto& r : reports) out << oracle::to_json_line(r) << '\n';
    return oracle::all_passed(reports) ? kOk : kVerificationFailed;
  } catch (const detail::Failure& f) {
    return detail::report(err, f);
  } catch (const Error& e) {
    return detail::report(err, {kUsage, std::string(to_string(e.kind())), e.what()});
  }
}

}  // namespace cmvno::cli

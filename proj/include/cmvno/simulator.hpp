#pragma once

// Multi-slot market simulation, the no-sensing baseline operator, and the
// parameter sweeps behind the sensing-impact figures.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cmvno/demand.hpp"
#include "cmvno/equilibrium.hpp"
#include "cmvno/error.hpp"
#include "cmvno/format.hpp"
#include "cmvno/market_model.hpp"
#include "cmvno/numeric.hpp"
#include "cmvno/parallel.hpp"
#include "cmvno/rng.hpp"

namespace cmvno {

struct SlotRecord {
  std::size_t slot;
  double alpha;
  double b_l;
  double pi;
  double profit_realized;
  double profit_baseline;
  std::vector<double> user_payoffs;
};

struct SimulationTrace {
  std::vector<SlotRecord> records;
  double mean_profit = 0.0;
  double mean_profit_baseline = 0.0;
  std::size_t price_change_slots = 0;
  std::uint64_t seed = 0;
};

struct BaselineOutcome {
  double pi;
  double profit;
};

/// Operator profit for a fixed sensing amount once alpha is realized.
inline double realized_profit(const Scenario& scenario, double b_s, double alpha) {
  return stage2_lease(scenario.G(), SensingOutcome{b_s, alpha}, scenario.costs(), scenario.snr_model()).profit;
}

/// Operator that cannot sense: leases up to the Stage II threshold.
inline BaselineOutcome baseline_outcome(const Scenario& scenario) {
  const double G = scenario.G();
  const auto model = scenario.snr_model();
  if (model == SnrModel::HighSnr) {
    const double c_l = scenario.costs().c_l;
    return {1.0 + c_l, G * std::exp(-(2.0 + c_l))};
  }
  const auto lease = stage2_lease(G, SensingOutcome{0.0, 0.0}, scenario.costs(), model);
  const auto price = stage3_price(G, Investment{0.0, 0.0, lease.b_l_star}, scenario.costs(), model);
  return {price.pi_star.value_or(0.0), lease.profit};
}

/// Realization above which sensing beats the baseline, for a solved Stage I.
inline double find_alpha_th(const Scenario& scenario, const SensingDecision& sensing) {
  if (sensing.b_s_star <= 0.0) fail(ErrorKind::NoThreshold, "operator does not sense; realized profit equals the baseline");
  const double base = baseline_outcome(scenario).profit;
  auto gap = [&](double a) { return realized_profit(scenario, sensing.b_s_star, a) - base; };
  if (gap(0.0) >= 0.0 || gap(1.0) <= 0.0) fail(ErrorKind::NoThreshold, "realized profit does not cross the baseline on [0,1]");
  return numeric::bisect(gap, 0.0, 1.0, 1e-14);
}

inline double find_alpha_th(const Scenario& scenario) { return find_alpha_th(scenario, stage1_sense(scenario)); }

/// Slot-by-slot market with alpha drawn from stream (seed, slot). Stage I is
/// solved once; every slot replays Stages II-IV.
inline SimulationTrace run(const Scenario& scenario, std::size_t slots, std::uint64_t seed, unsigned threads = 0) {
  if (slots == 0) fail(ErrorKind::InvalidArgument, "simulation needs at least one slot");
  const auto sensing = stage1_sense(scenario);
  const auto baseline = baseline_outcome(scenario);

  SimulationTrace trace;
  trace.seed = seed;
  trace.records.resize(slots);
  parallel_for(slots, threads, [&](std::size_t slot) {
    CounterRng stream(seed, slot);
    const double alpha = alpha_sample(scenario.alpha(), stream);
    const auto eq = equilibrium_at(scenario, sensing, alpha);
    SlotRecord rec{slot, alpha, eq.b_l, eq.pi, eq.operator_profit_realized, baseline.profit, {}};
    rec.user_payoffs.reserve(eq.per_user.size());
    for (const auto& d : eq.per_user) rec.user_payoffs.push_back(d.payoff);
    trace.records[slot] = std::move(rec);
  });

  double total = 0.0;
  double total_base = 0.0;
  for (const auto& r : trace.records) {
    total += r.profit_realized;
    total_base += r.profit_baseline;
    if (std::abs(r.pi - baseline.pi) > 1e-9) ++trace.price_change_slots;
  }
  trace.mean_profit = total / static_cast<double>(slots);
  trace.mean_profit_baseline = total_base / static_cast<double>(slots);
  return trace;
}

enum class SweepAxis { SensingCost, LeasingCost, Alpha };

constexpr std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::SensingCost: return "cs";
    case SweepAxis::LeasingCost: return "cl";
    case SweepAxis::Alpha: return "alpha";
  }
  return "?";
}

inline std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  if (name == "cs" || name == "c_s") return SweepAxis::SensingCost;
  if (name == "cl" || name == "c_l") return SweepAxis::LeasingCost;
  if (name == "alpha") return SweepAxis::Alpha;
  return std::nullopt;
}

/// One sweep point, normalized by G (and by g for the user payoff).
struct SweepRow {
  std::string axis;
  double value;
  double bs_over_g;
  double bl_over_g;
  double pi;
  double eprofit_over_g;
  double baseline_over_g;
  double payoff_over_g;
};

struct SweepOptions {
  /// Realization used for the per-slot columns when alpha is not swept.
  std::optional<double> alpha;
};

namespace detail {

/// Equilibrium payoff per unit g at price pi.
inline double payoff_per_g(double pi, SnrModel model) { return optimal_demand(1.0, pi, model).payoff; }

inline SweepRow sweep_point(const Scenario& s, std::string axis_label, double value, double alpha) {
  const double G = s.G();
  const auto sensing = stage1_sense(s);
  const auto eq = equilibrium_at(s, sensing, alpha);
  return {std::move(axis_label),
          value,
          sensing.b_s_star / G,
          eq.b_l / G,
          eq.pi,
          sensing.expected_profit / G,
          baseline_outcome(s).profit / G,
          payoff_per_g(eq.pi, s.snr_model())};
}

inline Scenario apply_axis(const Scenario& s, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::SensingCost: return s.with_costs(CostParams::make(value, s.costs().c_l));
    case SweepAxis::LeasingCost: return s.with_costs(CostParams::make(s.costs().c_s, value));
    case SweepAxis::Alpha: return s;
  }
  return s;
}

}  // namespace detail

/// One row per grid value along `axis`.
inline std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& grid,
                                   SweepOptions opts = {}) {
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  const double default_alpha = opts.alpha.value_or(base.alpha().mean());
  for (double v : grid) {
    const Scenario s = detail::apply_axis(base, axis, v);
    const double alpha = axis == SweepAxis::Alpha ? v : default_alpha;
    rows.push_back(detail::sweep_point(s, std::string(to_string(axis)), v, alpha));
  }
  return rows;
}

/// Cartesian sweep over two axes. The inner axis names the row; the outer
/// value is folded into the label as "inner@outer=value".
inline std::vector<SweepRow> sweep(const Scenario& base, SweepAxis outer, const std::vector<double>& outer_grid,
                                   SweepAxis inner, const std::vector<double>& inner_grid, SweepOptions opts = {}) {
  if (outer == inner) fail(ErrorKind::InvalidArgument, "sweep axes must differ");
  if (outer_grid.empty() || inner_grid.empty()) fail(ErrorKind::InvalidArgument, "sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(outer_grid.size() * inner_grid.size());
  for (double o : outer_grid) {
    const Scenario s = detail::apply_axis(base, outer, o);
    SweepOptions inner_opts = opts;
    if (outer == SweepAxis::Alpha) inner_opts.alpha = o;
    auto part = sweep(s, inner, inner_grid, inner_opts);
    const std::string label = std::string(to_string(inner)) + "@" + std::string(to_string(outer)) + "=" + format_number(o);
    for (auto& r : part) {
      r.axis = label;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

inline constexpr std::string_view kTraceCsvHeader = "slot,alpha,b_l,pi,profit,profit_baseline";
inline constexpr std::string_view kSweepCsvHeader =
    "axis,value,bs_over_g,bl_over_g,pi,eprofit_over_g,baseline_over_g,payoff_over_g";

inline void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.slot << ',' << format_number(r.alpha) << ',' << format_number(r.b_l) << ',' << format_number(r.pi) << ','
        << format_number(r.profit_realized) << ',' << format_number(r.profit_baseline) << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.axis << ',' << format_number(r.value) << ',' << format_number(r.bs_over_g) << ','
        << format_number(r.bl_over_g) << ',' << format_number(r.pi) << ',' << format_number(r.eprofit_over_g) << ','
        << format_number(r.baseline_over_g) << ',' << format_number(r.payoff_over_g) << '\n';
  }
}

}  // namespace cmvno

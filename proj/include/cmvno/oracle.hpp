#pragma once

// Brute-force verification of the backward-induction solvers.
//
// The oracle never calls the solver paths it checks. Stage III is verified by
// enumerating prices over min(D(pi), pi * supply), using only the demand
// primitives. Stages II and I use a RevenueCurve built the same way (peak by
// enumeration, market-clearing price by bisection on total demand), then
// enumerate leasing or sensing amounts; Stage I takes the alpha expectation
// by Monte-Carlo sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmvno/demand.hpp"
#include "cmvno/equilibrium.hpp"
#include "cmvno/format.hpp"
#include "cmvno/market_model.hpp"
#include "cmvno/numeric.hpp"
#include "cmvno/parallel.hpp"
#include "cmvno/rng.hpp"

namespace cmvno::oracle {

enum class Stage { Pricing, Leasing, Sensing, EndToEnd };

constexpr std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Pricing: return "pricing";
    case Stage::Leasing: return "leasing";
    case Stage::Sensing: return "sensing";
    case Stage::EndToEnd: return "end_to_end";
  }
  return "?";
}

struct OracleReport {
  Stage stage;
  std::size_t scenario_index = 0;
  double closed_form_value = 0.0;   ///< money: revenue or profit
  double brute_force_value = 0.0;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  double value_tol = 0.0;           ///< absolute tolerance on abs_dev
  double closed_form_decision = 0.0;  ///< price, lease or sensing amount
  double brute_force_decision = 0.0;
  double decision_dev = 0.0;
  double decision_tol = 0.0;        ///< one grid step
  double paired_gap = 0.0;          ///< Sensing only: MC profit gap between the two decisions
  double paired_gap_tol = 0.0;      ///< Sensing only: 3 standard errors of that gap
  std::size_t grid_density = 0;
  std::size_t mc_samples = 0;
  bool passed = false;
};

inline constexpr double kRelFloor = 1e-12;

struct Tolerances {
  double profit_rel = 0.01;
};

/// Closed-form solver entry points under test. Tests swap in corrupted
/// versions to confirm the oracle flags them.
struct ClosedForms {
  std::function<PricingDecision(double, double, SnrModel)> price = [](double G, double supply, SnrModel m) {
    return stage3_price(G, supply, m);
  };
  std::function<LeasingDecision(double, const SensingOutcome&, const CostParams&, SnrModel)> lease =
      [](double G, const SensingOutcome& s, const CostParams& c, SnrModel m) { return stage2_lease(G, s, c, m); };
  std::function<SensingDecision(const Scenario&)> sense = [](const Scenario& s) { return stage1_sense(s); };
  std::function<EquilibriumOutcome(const Scenario&, const SensingDecision&, double)> equilibrium =
      [](const Scenario& s, const SensingDecision& d, double a) { return equilibrium_at(s, d, a); };
};

namespace detail {

inline void finish_values(OracleReport& r, double rel_tol, double stat_tol = 0.0) {
  r.abs_dev = std::abs(r.closed_form_value - r.brute_force_value);
  r.rel_dev = r.abs_dev / std::max(std::abs(r.closed_form_value), kRelFloor);
  r.value_tol = std::max(rel_tol * std::abs(r.closed_form_value), stat_tol);
  r.decision_dev = std::abs(r.closed_form_decision - r.brute_force_decision);
}

/// Price grid over (0, 10]: a tenth of the points log-spaced on [1e-6, 0.1),
/// the rest uniform on [0.1, 10].
inline std::vector<double> price_grid(std::size_t density) {
  const std::size_t n_log = std::max<std::size_t>(density / 10, 2);
  const std::size_t n_lin = std::max<std::size_t>(density - n_log, 2);
  std::vector<double> grid;
  grid.reserve(n_log + n_lin);
  const double l0 = std::log(1e-6);
  const double l1 = std::log(0.1);
  for (std::size_t i = 0; i < n_log; ++i) grid.push_back(std::exp(l0 + (l1 - l0) * i / n_log));
  for (std::size_t i = 0; i < n_lin; ++i) grid.push_back(0.1 + 9.9 * i / (n_lin - 1));
  return grid;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

struct GridMax {
  double argmax;
  double value;
  double step;  ///< spacing of the coarse grid around the argmax
};

/// Exhaustive search over `grid`, then a second uniform pass of the same
/// density between the neighbours of the best point.
template <class F>
GridMax grid_search(const std::vector<double>& grid, F&& f, bool refine = true) {
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double left = grid[best == 0 ? 0 : best - 1];
  const double right = grid[std::min(best + 1, grid.size() - 1)];
  const double step = std::max(grid[best] - left, right - grid[best]);
  GridMax out{grid[best], best_v, step};
  if (!refine || right <= left) return out;
  for (double x : uniform_grid(left, right, grid.size())) {
    const double v = f(x);
    if (v > out.value) {
      out.value = v;
      out.argmax = x;
    }
  }
  return out;
}

}  // namespace detail

/// Optimal-revenue curve of a market as a function of supply, from demand
/// primitives only.
class RevenueCurve {
 public:
  RevenueCurve(double G, SnrModel model, std::size_t density = 20000) : G_(G), model_(model) {
    auto revenue = [&](double pi) { return revenue_at_price(G_, pi, model_); };
    const auto peak = detail::grid_search(detail::price_grid(density), revenue);
    peak_price_ = peak.argmax;
    peak_revenue_ = peak.value;
    peak_supply_ = total_demand(G_, peak_price_, model_);
  }

  double G() const { return G_; }
  SnrModel model() const { return model_; }
  double peak_price() const { return peak_price_; }
  double peak_supply() const { return peak_supply_; }
  double peak_revenue() const { return peak_revenue_; }

  /// Price at which total demand equals `supply` (supply below the peak).
  double clearing_price(double supply) const {
    auto excess = [&](double pi) { return total_demand(G_, pi, model_) - supply; };
    double hi = std::max(2.0 * peak_price_, 1.0);
    for (int i = 0; excess(hi) > 0.0; ++i) {
      if (i > 60) fail(ErrorKind::BracketFailure, "oracle: clearing price bracket failed");
      hi *= 2.0;
    }
    return numeric::bisect(excess, peak_price_, hi, 1e-14 * hi);
  }

  /// Price the brute-force market charges for `supply`.
  double price(double supply) const { return supply >= peak_supply_ ? peak_price_ : clearing_price(supply); }

  /// max over pi of min(D(pi), pi * supply).
  double revenue(double supply) const {
    if (supply <= 0.0) return 0.0;
    if (supply >= peak_supply_) return peak_revenue_;
    return supply * clearing_price(supply);
  }

 private:
  double G_;
  SnrModel model_;
  double peak_price_ = 0.0;
  double peak_revenue_ = 0.0;
  double peak_supply_ = 0.0;
};

/// Stage III: enumerate prices on (0, 10] and maximize min(D, S).
inline OracleReport grid_stage3(double G, double supply, SnrModel model, std::size_t grid_density,
                                const ClosedForms& cf = {}, Tolerances tol = {}) {
  if (grid_density < 1000) fail(ErrorKind::InvalidArgument, "grid density must be at least 1e3");
  auto value = [&](double pi) { return std::min(revenue_at_price(G, pi, model), pi * supply); };
  const auto best = detail::grid_search(detail::price_grid(grid_density), value);
  const auto closed = cf.price(G, supply, model);

  OracleReport r{Stage::Pricing};
  r.grid_density = grid_density;
  r.closed_form_value = closed.revenue;
  r.brute_force_value = best.value;
  r.closed_form_decision = closed.pi_star.value_or(best.argmax);
  r.brute_force_decision = best.argmax;
  r.decision_tol = best.step;
  detail::finish_values(r, tol.profit_rel);
  r.passed = r.abs_dev <= r.value_tol && r.decision_dev <= r.decision_tol;
  return r;
}

/// Stage II: enumerate leasing amounts in [0, G] for a fully realized
/// sensing result (b_s = sensed).
inline OracleReport grid_stage2(double G, double sensed, const CostParams& costs, SnrModel model,
                                std::size_t grid_density, const ClosedForms& cf = {}, Tolerances tol = {},
                                const RevenueCurve* curve = nullptr) {
  if (grid_density < 1000) fail(ErrorKind::InvalidArgument, "grid density must be at least 1e3");
  std::optional<RevenueCurve> own;
  if (!curve) curve = &own.emplace(G, model);
  auto profit = [&](double b_l) { return curve->revenue(sensed + b_l) - costs.c_l * b_l - sensed * costs.c_s; };
  const auto best = detail::grid_search(detail::uniform_grid(0.0, G, grid_density), profit);
  const auto closed = cf.lease(G, SensingOutcome{sensed, 1.0}, costs, model);

  OracleReport r{Stage::Leasing};
  r.grid_density = grid_density;
  r.closed_form_value = closed.profit;
  r.brute_force_value = best.value;
  r.closed_form_decision = closed.b_l_star;
  r.brute_force_decision = best.argmax;
  r.decision_tol = best.step;
  detail::finish_values(r, tol.profit_rel);
  r.passed = r.abs_dev <= r.value_tol && r.decision_dev <= r.decision_tol;
  return r;
}

namespace detail {

/// Stage II value of a sensed amount x (sensing cost excluded), tabulated on
/// [lease target, peak supply] where it has no closed form for the oracle.
class StageTwoValue {
 public:
  StageTwoValue(const RevenueCurve& curve, double c_l, std::size_t grid_density, std::size_t table_size = 8192)
      : curve_(curve), c_l_(c_l) {
    auto profit = [&](double s) { return curve.revenue(s) - c_l * s; };
    target_ = grid_search(uniform_grid(0.0, curve.peak_supply(), grid_density), profit).argmax;
    target_value_ = curve.revenue(target_);
    lo_ = target_;
    hi_ = curve.peak_supply();
    table_.resize(table_size + 1);
    for (std::size_t i = 0; i <= table_size; ++i) table_[i] = curve.revenue(lo_ + (hi_ - lo_) * i / table_size);
    inv_h_ = hi_ > lo_ ? table_size / (hi_ - lo_) : 0.0;
  }

  double lease_target() const { return target_; }
  double peak_supply() const { return hi_; }
  double lease_cost() const { return c_l_; }

  /// Below the lease target: lease up to it.
  double linear_part(double x) const { return target_value_ - c_l_ * (target_ - x); }
  double plateau() const { return curve_.peak_revenue(); }

  double interpolated(double x) const {
    const double pos = (x - lo_) * inv_h_;
    const std::size_t last = table_.size() - 1;
    if (pos <= 0.0) return table_.front();
    if (pos >= static_cast<double>(last)) return table_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

  double operator()(double x) const {
    if (x <= target_) return linear_part(x);
    if (x >= hi_) return plateau();
    return interpolated(x);
  }

 private:
  const RevenueCurve& curve_;
  double c_l_;
  double target_ = 0.0;
  double target_value_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double inv_h_ = 0.0;
  std::vector<double> table_;
};

}  // namespace detail

/// Stage I: enumerate sensing amounts on [0, 4 x peak supply], estimating the
/// alpha expectation with `mc_samples` common draws. Values pass within
/// max(relative tolerance, 3 standard errors); decisions pass within one grid
/// step, or when the Monte-Carlo profit gap between the two decisions is
/// within 3 standard errors of the paired difference.
inline OracleReport grid_stage1(const Scenario& scenario, std::size_t grid_density, std::size_t mc_samples,
                                std::uint64_t seed, const ClosedForms& cf = {}, Tolerances tol = {},
                                unsigned threads = 0) {
  if (grid_density < 1000) fail(ErrorKind::InvalidArgument, "grid density must be at least 1e3");
  if (mc_samples < 1000) fail(ErrorKind::InvalidArgument, "Monte-Carlo sample count must be at least 1e3");
  const double G = scenario.G();
  const double c_s = scenario.costs().c_s;
  const RevenueCurve curve(G, scenario.snr_model());
  const detail::StageTwoValue value(curve, scenario.costs().c_l, grid_density);

  std::vector<double> alpha(mc_samples);
  CounterRng stream(seed, 0);
  for (auto& a : alpha) a = alpha_sample(scenario.alpha(), stream);
  std::vector<double> sorted = alpha;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> prefix(mc_samples + 1, 0.0);
  for (std::size_t j = 0; j < mc_samples; ++j) prefix[j + 1] = prefix[j] + sorted[j];
  const double m = static_cast<double>(mc_samples);

  auto mc_objective = [&](double b_s) {
    if (b_s <= 0.0) return value.linear_part(0.0);
    const auto lin_end = std::upper_bound(sorted.begin(), sorted.end(), value.lease_target() / b_s) - sorted.begin();
    const auto flat_begin = std::lower_bound(sorted.begin(), sorted.end(), value.peak_supply() / b_s) - sorted.begin();
    const auto mid_end = std::max(flat_begin, lin_end);
    double total = static_cast<double>(lin_end) * value.linear_part(0.0) + b_s * value.lease_cost() * prefix[lin_end];
    for (auto j = lin_end; j < mid_end; ++j) total += value.interpolated(b_s * sorted[j]);
    total += static_cast<double>(mc_samples - mid_end) * value.plateau();
    return total / m - b_s * c_s;
  };

  const auto grid = detail::uniform_grid(0.0, 4.0 * curve.peak_supply(), grid_density);
  std::vector<double> objective(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { objective[i] = mc_objective(grid[i]); });
  const auto best_it = std::max_element(objective.begin(), objective.end());
  const auto best = static_cast<std::size_t>(best_it - objective.begin());
  const double step = grid[1] - grid[0];
  const double b_hat = grid[best];

  const auto closed = cf.sense(scenario);

  double mean_p = 0.0;
  double mean_d = 0.0;
  for (double a : alpha) {
    const double p_hat = value(b_hat * a) - b_hat * c_s;
    mean_p += p_hat;
    mean_d += p_hat - (value(closed.b_s_star * a) - closed.b_s_star * c_s);
  }
  mean_p /= m;
  mean_d /= m;
  double var_p = 0.0;
  double var_d = 0.0;
  for (double a : alpha) {
    const double p_hat = value(b_hat * a) - b_hat * c_s;
    const double d = p_hat - (value(closed.b_s_star * a) - closed.b_s_star * c_s);
    var_p += (p_hat - mean_p) * (p_hat - mean_p);
    var_d += (d - mean_d) * (d - mean_d);
  }
  var_p /= (m - 1.0);
  var_d /= (m - 1.0);

  OracleReport r{Stage::Sensing};
  r.grid_density = grid_density;
  r.mc_samples = mc_samples;
  r.closed_form_value = closed.expected_profit;
  r.brute_force_value = *best_it;
  r.closed_form_decision = closed.b_s_star;
  r.brute_force_decision = b_hat;
  r.decision_tol = step;
  r.paired_gap = mean_d;
  r.paired_gap_tol = 3.0 * std::sqrt(var_d / m);
  detail::finish_values(r, tol.profit_rel, 3.0 * std::sqrt(var_p / m));
  const bool decision_ok = r.decision_dev <= r.decision_tol || r.paired_gap <= r.paired_gap_tol;
  r.passed = r.abs_dev <= r.value_tol && decision_ok;
  return r;
}

/// Whole pipeline at the mean realization: the solver's equilibrium against a
/// brute-force market run with the same sensing decision.
inline OracleReport end_to_end(const Scenario& scenario, std::size_t grid_density, const ClosedForms& cf = {},
                               Tolerances tol = {}, const RevenueCurve* curve = nullptr) {
  if (grid_density < 1000) fail(ErrorKind::InvalidArgument, "grid density must be at least 1e3");
  std::optional<RevenueCurve> own;
  if (!curve) curve = &own.emplace(scenario.G(), scenario.snr_model());
  const detail::StageTwoValue value(*curve, scenario.costs().c_l, grid_density);
  const double alpha = scenario.alpha().mean();
  const auto sensing = cf.sense(scenario);
  const auto eq = cf.equilibrium(scenario, sensing, alpha);

  const double sensed = sensing.b_s_star * alpha;
  const double supply = std::max(sensed, value.lease_target());
  const double price = curve->price(supply);

  OracleReport r{Stage::EndToEnd};
  r.grid_density = grid_density;
  r.closed_form_value = eq.operator_profit_realized;
  r.brute_force_value = value(sensed) - sensing.b_s_star * scenario.costs().c_s;
  r.closed_form_decision = eq.pi;
  r.brute_force_decision = price;
  const auto grid = detail::price_grid(grid_density);
  const auto above = std::upper_bound(grid.begin(), grid.end(), price);
  r.decision_tol = above == grid.end() || above == grid.begin() ? grid.back() - grid[grid.size() - 2] : *above - *(above - 1);
  detail::finish_values(r, tol.profit_rel);
  r.passed = r.abs_dev <= r.value_tol && r.decision_dev <= r.decision_tol;
  return r;
}

struct Budgets {
  std::size_t grid_density = 10000;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0;
  Tolerances tol{};
  unsigned threads = 0;
};

/// Every stage of every scenario. Pricing is checked at the equilibrium
/// supply for the mean realization, leasing at the sensed amount for it.
inline std::vector<OracleReport> end_to_end_check(const std::vector<Scenario>& batch, const Budgets& budgets,
                                                  const ClosedForms& cf = {}) {
  std::vector<OracleReport> out(batch.size() * 4);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Scenario& s = batch[k];
    const double G = s.G();
    const RevenueCurve curve(G, s.snr_model());
    const std::uint64_t seed = budgets.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
    auto sensing = grid_stage1(s, budgets.grid_density, budgets.mc_samples, seed, cf, budgets.tol, budgets.threads);
    const auto decision = cf.sense(s);
    const double alpha = s.alpha().mean();
    const auto eq = cf.equilibrium(s, decision, alpha);
    auto pricing = grid_stage3(G, decision.b_s_star * alpha + eq.b_l, s.snr_model(), budgets.grid_density, cf, budgets.tol);
    auto leasing = grid_stage2(G, decision.b_s_star * alpha, s.costs(), s.snr_model(), budgets.grid_density, cf,
                               budgets.tol, &curve);
    auto whole = end_to_end(s, budgets.grid_density, cf, budgets.tol, &curve);
    std::size_t i = 4 * k;
    for (auto* r : {&pricing, &leasing, &sensing, &whole}) {
      r->scenario_index = k;
      out[i++] = *r;
    }
  }
  return out;
}

inline bool all_passed(const std::vector<OracleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const OracleReport& r) { return r.passed; });
}

/// Random high-SNR scenarios with c_l in [0.5, 3] and c_s between the
/// sensing-cost bound and c_l / 2, with one to five users.
inline std::vector<Scenario> random_scenarios(std::size_t count, std::uint64_t seed,
                                              AlphaDistribution alpha = AlphaDistribution::uniform(),
                                              SnrModel model = SnrModel::HighSnr) {
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    const double c_l = 0.5 + 2.5 * rng.next_double();
    const double lo = CostParams::sensing_cost_bound(c_l);
    const double c_s = lo + (c_l / 2.0 - lo) * rng.next_double();
    const auto n_users = 1 + static_cast<std::size_t>(rng.next_double() * 5.0);
    std::vector<UserProfile> users;
    for (std::size_t u = 0; u < n_users; ++u) users.push_back(UserProfile::from_g(0.5 + 4.5 * rng.next_double()));
    out.emplace_back(std::move(users), CostParams::make(c_s, c_l), alpha, model);
  }
  return out;
}

inline nlohmann::json to_json(const OracleReport& r) {
  return {{"stage", to_string(r.stage)},
          {"scenario", r.scenario_index},
          {"closed_form", round_12(r.closed_form_value)},
          {"brute_force", round_12(r.brute_force_value)},
          {"abs_dev", round_12(r.abs_dev)},
          {"rel_dev", round_12(r.rel_dev)},
          {"value_tol", round_12(r.value_tol)},
          {"closed_form_decision", round_12(r.closed_form_decision)},
          {"brute_force_decision", round_12(r.brute_force_decision)},
          {"decision_dev", round_12(r.decision_dev)},
          {"decision_tol", round_12(r.decision_tol)},
          {"grid_density", r.grid_density},
          {"mc_samples", r.mc_samples},
          {"passed", r.passed}};
}

inline std::string to_json_line(const OracleReport& r) { return to_json(r).dump(); }

}  // namespace cmvno::oracle

#pragma once

// Backward induction for the operator's pricing (Stage III), leasing
// (Stage II) and sensing (Stage I) decisions.
//
// All solvers work on the per-G normalized problem (bandwidths and profits
// divided by G) and rescale at the boundary. Decisions therefore scale
// exactly linearly with G and prices do not depend on G at all.

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "cmvno/demand.hpp"
#include "cmvno/error.hpp"
#include "cmvno/market_model.hpp"
#include "cmvno/numeric.hpp"

namespace cmvno {

enum class PricingRegime { ExcessiveSupply, ConservativeSupply };
enum class LeaseCase { CS1, CS2, ES3 };
enum class SensingRegime { HighSensingCost, LowSensingCost, BelowCostBound };

constexpr std::string_view to_string(PricingRegime r) {
  return r == PricingRegime::ExcessiveSupply ? "excessive_supply" : "conservative_supply";
}
constexpr std::string_view to_string(LeaseCase c) {
  switch (c) {
    case LeaseCase::CS1: return "CS1";
    case LeaseCase::CS2: return "CS2";
    case LeaseCase::ES3: return "ES3";
  }
  return "?";
}
constexpr std::string_view to_string(SensingRegime r) {
  switch (r) {
    case SensingRegime::HighSensingCost: return "high_sensing_cost";
    case SensingRegime::LowSensingCost: return "low_sensing_cost";
    case SensingRegime::BelowCostBound: return "below_cost_bound";
  }
  return "?";
}

/// Bandwidth already committed when the price is chosen.
struct Investment {
  double b_s = 0.0;
  double alpha = 0.0;
  double b_l = 0.0;

  double supply() const { return b_s * alpha + b_l; }
};

struct PricingDecision {
  std::optional<double> pi_star;  ///< empty for a market with zero supply
  PricingRegime regime;
  double revenue;
  double profit;
};

struct LeasingDecision {
  double b_l_star;
  LeaseCase case_tag;
  double profit;
};

struct SensingDecision {
  double b_s_star;
  SensingRegime regime;
  double expected_profit;
};

struct EquilibriumOutcome {
  double b_s;
  double alpha;
  double b_l;
  double pi;
  double operator_profit_realized;
  std::vector<DemandResult> per_user;
  double snr_common;
  SensingRegime sensing_regime;
  LeaseCase lease_case;
  PricingRegime pricing_regime;
};

/// Supply thresholds per unit of G.
struct NormalizedThresholds {
  double conservative;  ///< supply at the revenue peak (e^-2, or b_th1/G)
  double lease;         ///< lease-up-to level (e^-(2+c_l), or b_th2/G)
  double peak_price;    ///< price charged at or above the conservative level
};

namespace detail {

/// b_th2/G: root of D'(u) = c_l, bisected in log u for relative accuracy.
inline double lease_threshold_general(double c_l) {
  const double u_peak = general_snr_peak().supply_per_g;
  if (c_l <= 0.0) return u_peak;
  auto excess = [c_l](double log_u) { return marginal_revenue_of_bandwidth(1.0, std::exp(log_u)) - c_l; };
  constexpr double kLogFloor = -690.0;
  if (excess(kLogFloor) <= 0.0) return 0.0;
  return std::exp(numeric::bisect(excess, kLogFloor, std::log(u_peak), 1e-13));
}

inline NormalizedThresholds thresholds(double c_l, SnrModel model) {
  if (model == SnrModel::HighSnr) return {std::exp(-2.0), std::exp(-(2.0 + c_l)), 1.0};
  const auto& peak = general_snr_peak();
  return {peak.supply_per_g, lease_threshold_general(c_l), peak.price};
}

struct NormalizedPrice {
  std::optional<double> pi;
  PricingRegime regime;
  double revenue;
};

/// Stage III on a unit-G market with supply s.
inline NormalizedPrice price_normalized(double s, SnrModel model, const NormalizedThresholds& t) {
  if (s >= t.conservative) return {t.peak_price, PricingRegime::ExcessiveSupply, t.peak_price * t.conservative};
  if (s <= 0.0) return {std::nullopt, PricingRegime::ConservativeSupply, 0.0};
  const double pi = model == SnrModel::HighSnr ? -std::log(s) - 1.0 : price_at_q(1.0 / s);
  return {pi, PricingRegime::ConservativeSupply, s * pi};
}

/// Stage II on a unit-G market: sensed x = bs * alpha.
inline LeasingDecision lease_normalized(double bs, double alpha, const CostParams& c, SnrModel model,
                                        const NormalizedThresholds& t) {
  const double x = bs * alpha;
  const double sensing_cost = bs * c.c_s;
  if (model == SnrModel::HighSnr) {
    if (x <= t.lease) return {t.lease - x, LeaseCase::CS1, t.lease + x * c.c_l - sensing_cost};
    if (x <= t.conservative) return {0.0, LeaseCase::CS2, x * (-std::log(x)) - x - sensing_cost};
    return {0.0, LeaseCase::ES3, t.conservative - sensing_cost};
  }
  const double b_l = std::max(t.lease - x, 0.0);
  const LeaseCase tag = x <= t.lease ? LeaseCase::CS1 : (x <= t.conservative ? LeaseCase::CS2 : LeaseCase::ES3);
  const double revenue = price_normalized(x + b_l, model, t).revenue;
  return {b_l, tag, revenue - b_l * c.c_l - sensing_cost};
}

inline bool closed_form_applies(const Scenario& s) {
  return s.snr_model() == SnrModel::HighSnr &&
         std::holds_alternative<AlphaDistribution::Uniform01>(s.alpha().law());
}

}  // namespace detail

/// Expected-profit pieces for high SNR and uniform alpha (G-scaled).
namespace closed_form {

inline double lease_threshold(double G, double c_l) { return G * std::exp(-(2.0 + c_l)); }

/// Sensing amount in [0, G e^-(2+c_l)].
inline double r1(double G, double b_s, const CostParams& c) {
  return lease_threshold(G, c.c_l) + b_s * (c.c_l / 2.0 - c.c_s);
}

/// Sensing amount in (G e^-(2+c_l), G e^-2].
inline double r2(double G, double b_s, const CostParams& c) {
  const double ratio = lease_threshold(G, c.c_l) / b_s;
  return b_s / 2.0 * std::log(G / b_s) - b_s / 4.0 + b_s / 4.0 * ratio * ratio - b_s * c.c_s;
}

/// Sensing amount above G e^-2.
inline double r3(double G, double b_s, const CostParams& c) {
  const double peak = G * std::exp(-2.0);
  return peak * peak * std::expm1(-2.0 * c.c_l) / (4.0 * b_s) - b_s * c.c_s + peak;
}

/// First-order condition dR2/dB_s for an unscaled G = 1 market.
inline double sensing_foc(double u, const CostParams& c) {
  const double t = std::exp(-(2.0 + c.c_l)) / (2.0 * u);
  return 0.5 * std::log(1.0 / u) - 0.75 - c.c_s - t * t;
}

inline double expected_profit(double G, double b_s, const CostParams& c) {
  if (b_s <= lease_threshold(G, c.c_l)) return r1(G, b_s, c);
  if (b_s <= G * std::exp(-2.0)) return r2(G, b_s, c);
  return r3(G, b_s, c);
}

}  // namespace closed_form

/// Revenue-peak bandwidth of the general-SNR market (~0.4624 G).
inline double b_th1(double G) {
  detail::require_positive(G, "G");
  return G * general_snr_peak().supply_per_g;
}

/// Bandwidth where general-SNR marginal revenue equals the leasing cost.
inline double b_th2(double G, double c_l) {
  detail::require_positive(G, "G");
  if (!(c_l >= 0.0)) fail(ErrorKind::DomainError, "leasing cost must be non-negative");
  return G * detail::lease_threshold_general(c_l);
}

/// Supply below which the market is in the conservative regime.
inline double conservative_boundary(double G, SnrModel model) {
  return G * detail::thresholds(0.0, model).conservative;
}

/// Level the operator leases up to when sensing falls short.
inline double lease_threshold(double G, double c_l, SnrModel model) {
  return G * detail::thresholds(c_l, model).lease;
}

/// Stage III: revenue-maximizing price for a fixed supply. Profit equals
/// revenue here (no investment attached).
inline PricingDecision stage3_price(double G, double supply, SnrModel model) {
  detail::require_positive(G, "G");
  if (!(supply >= 0.0) || !std::isfinite(supply)) fail(ErrorKind::DomainError, "supply must be finite and non-negative");
  const auto p = detail::price_normalized(supply / G, model, detail::thresholds(0.0, model));
  return {p.pi, p.regime, G * p.revenue, G * p.revenue};
}

/// Stage III with the sunk investment costs deducted from the profit.
inline PricingDecision stage3_price(double G, const Investment& inv, const CostParams& costs, SnrModel model) {
  auto d = stage3_price(G, inv.supply(), model);
  d.profit = d.revenue - inv.b_s * costs.c_s - inv.b_l * costs.c_l;
  return d;
}

struct SensingOutcome {
  double b_s;
  double alpha;
};

/// Stage II: optimal leasing after sensing b_s with realization alpha.
inline LeasingDecision stage2_lease(double G, const SensingOutcome& sensing, const CostParams& costs, SnrModel model) {
  detail::require_positive(G, "G");
  if (!(sensing.b_s >= 0.0) || !(sensing.alpha >= 0.0 && sensing.alpha <= 1.0)) {
    fail(ErrorKind::DomainError, "sensing amount must be non-negative and alpha in [0,1]");
  }
  auto d = detail::lease_normalized(sensing.b_s / G, sensing.alpha, costs, model, detail::thresholds(costs.c_l, model));
  return {G * d.b_l_star, d.case_tag, G * d.profit};
}

/// Stage II for a fully realized sensing result (b_s = sensed, alpha = 1).
inline LeasingDecision stage2_lease(double G, double sensed, const CostParams& costs, SnrModel model) {
  return stage2_lease(G, SensingOutcome{sensed, 1.0}, costs, model);
}

namespace detail {

/// Stage I objective on a unit-G market.
inline double expected_profit_normalized(double bs, const CostParams& c, const AlphaDistribution& alpha,
                                         SnrModel model, QuadratureOptions opts) {
  if (model == SnrModel::HighSnr && std::holds_alternative<AlphaDistribution::Uniform01>(alpha.law())) {
    return closed_form::expected_profit(1.0, bs, c);
  }
  const auto t = thresholds(c.c_l, model);
  auto profit_at = [&](double a) { return lease_normalized(bs, a, c, model, t).profit; };
  std::vector<double> cuts;
  if (bs > 0.0) cuts = {t.lease / bs, t.conservative / bs};
  return alpha_expectation(alpha, profit_at, cuts, opts);
}

}  // namespace detail

/// Stage I objective: E_alpha of the Stage II profit for sensing amount b_s.
inline double expected_profit(double b_s, const Scenario& scenario, QuadratureOptions opts = {}) {
  if (!(b_s >= 0.0) || !std::isfinite(b_s)) fail(ErrorKind::DomainError, "sensing amount must be finite and non-negative");
  const double G = scenario.G();
  if (detail::closed_form_applies(scenario)) return closed_form::expected_profit(G, b_s, scenario.costs());
  return G * detail::expected_profit_normalized(b_s / G, scenario.costs(), scenario.alpha(), scenario.snr_model(), opts);
}

/// Stage I by bisection on the first-order condition. Only defined for the
/// high-SNR, uniform-alpha market with c_s in [cost bound, c_l/2].
inline SensingDecision stage1_sense_foc(const Scenario& scenario) {
  const auto& c = scenario.costs();
  if (!detail::closed_form_applies(scenario) || !c.low_bound_ok() || c.c_s > c.c_l / 2.0) {
    fail(ErrorKind::DomainError, "first-order sensing solution needs high SNR, uniform alpha and a low sensing cost");
  }
  const double G = scenario.G();
  const double lo = std::exp(-(2.0 + c.c_l));
  const double hi = std::exp(-2.0);
  double u = lo;
  if (c.c_s < c.c_l / 2.0) {
    auto foc = [&](double v) { return closed_form::sensing_foc(v, c); };
    if (foc(lo) <= 0.0) {
      u = lo;
    } else if (foc(hi) >= 0.0) {
      u = hi;
    } else {
      u = numeric::bisect(foc, lo, hi, 1e-12);
    }
  }
  const double b_s = G * u;
  return {b_s, SensingRegime::LowSensingCost, closed_form::r2(G, b_s, c)};
}

/// Stage I by golden-section search on the expected profit over
/// [0, 4 b_th1(G)], widening the bracket while the optimum sits on its edge.
inline SensingDecision stage1_sense_search(const Scenario& scenario, QuadratureOptions opts = {}) {
  const double G = scenario.G();
  auto objective = [&](double u) {
    return detail::expected_profit_normalized(u, scenario.costs(), scenario.alpha(), scenario.snr_model(), opts);
  };
  double upper = 4.0 * general_snr_peak().supply_per_g;
  numeric::MaximizeResult best{};
  for (int widen = 0;; ++widen) {
    best = numeric::golden_section_max(objective, 0.0, upper, 1e-8);
    if (best.argmax < 0.99 * upper) break;
    if (widen >= 40) fail(ErrorKind::OptimizerStall, "sensing search: optimum escapes every bracket");
    upper *= 4.0;
  }
  const double at_zero = objective(0.0);
  if (at_zero >= best.value) best = {0.0, at_zero};
  const bool below = detail::closed_form_applies(scenario) && !scenario.costs().low_bound_ok();
  const SensingRegime regime = best.argmax == 0.0 ? SensingRegime::HighSensingCost
                               : below            ? SensingRegime::BelowCostBound
                                                  : SensingRegime::LowSensingCost;
  return {G * best.argmax, regime, G * best.value};
}

/// Stage I: optimal sensing amount and expected profit.
inline SensingDecision stage1_sense(const Scenario& scenario, QuadratureOptions opts = {}) {
  const auto& c = scenario.costs();
  if (detail::closed_form_applies(scenario)) {
    if (c.c_s > c.c_l / 2.0) {
      return {0.0, SensingRegime::HighSensingCost, scenario.G() * std::exp(-(2.0 + c.c_l))};
    }
    if (c.low_bound_ok()) return stage1_sense_foc(scenario);
  }
  return stage1_sense_search(scenario, opts);
}

/// Full equilibrium for one realization, given an already solved Stage I.
inline EquilibriumOutcome equilibrium_at(const Scenario& scenario, const SensingDecision& sensing, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::DomainError, "alpha must lie in [0,1]");
  const double G = scenario.G();
  const auto model = scenario.snr_model();
  const auto lease = stage2_lease(G, SensingOutcome{sensing.b_s_star, alpha}, scenario.costs(), model);
  const auto price = stage3_price(G, Investment{sensing.b_s_star, alpha, lease.b_l_star}, scenario.costs(), model);
  if (!price.pi_star) fail(ErrorKind::DomainError, "equilibrium has zero supply; price undefined");
  const double pi = *price.pi_star;

  EquilibriumOutcome out{sensing.b_s_star, alpha, lease.b_l_star, pi, lease.profit, {}, 0.0,
                         sensing.regime, lease.case_tag, price.regime};
  out.per_user.reserve(scenario.users().size());
  for (const auto& u : scenario.users()) out.per_user.push_back(optimal_demand(u.g(), pi, model));
  out.snr_common = optimal_demand(G, pi, model).snr;
  return out;
}

inline EquilibriumOutcome equilibrium_at(const Scenario& scenario, double alpha) {
  return equilibrium_at(scenario, stage1_sense(scenario), alpha);
}

}  // namespace cmvno

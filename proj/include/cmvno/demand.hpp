#pragma once

// Price-taking user behaviour: rates, optimal bandwidth demand and the
// resulting aggregate demand / revenue curves, for both rate models.

#include <cmath>
#include <string>

#include "cmvno/error.hpp"
#include "cmvno/market_model.hpp"
#include "cmvno/numeric.hpp"

namespace cmvno {

struct DemandResult {
  double w;       ///< bandwidth demanded
  double payoff;  ///< nats
  double snr;     ///< g / w
};

struct QSolution {
  double q;   ///< common SNR
  double pi;  ///< price it corresponds to
};

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::DomainError, std::string(what) + " must be positive and finite");
}
inline void require_price(double pi) {
  if (!(pi >= 0.0) || !std::isfinite(pi)) fail(ErrorKind::DomainError, "price must be finite and non-negative");
}
}  // namespace detail

/// Achievable rate in nats over bandwidth w.
inline double rate(double g, double w, SnrModel model) {
  detail::require_positive(g, "g");
  detail::require_positive(w, "w");
  return model == SnrModel::General ? w * std::log1p(g / w) : w * std::log(g / w);
}

inline double user_payoff(double g, double w, double pi, SnrModel model) { return rate(g, w, model) - pi * w; }

/// Inverse of Q: the price at which users choose common SNR q.
inline double price_at_q(double q) { return std::log1p(q) - q / (1.0 + q); }

/// Solves ln(1+Q) - Q/(1+Q) = pi for Q >= 0 (bracket doubling + bisection,
/// then a Newton polish).
inline QSolution solve_q(double pi) {
  if (!std::isfinite(pi)) fail(ErrorKind::BracketFailure, "solve_q: price is not finite");
  if (pi < 0.0) fail(ErrorKind::DomainError, "solve_q: price must be non-negative");
  if (pi == 0.0) return {0.0, 0.0};
  auto residual = [pi](double q) { return price_at_q(q) - pi; };
  double hi = 1.0;
  int doublings = 0;
  while (residual(hi) <= 0.0) {
    hi *= 2.0;
    if (++doublings > 1000 || !std::isfinite(hi)) fail(ErrorKind::BracketFailure, "solve_q: bracket expansion exceeded cap");
  }
  const double lo = doublings == 0 ? 0.0 : hi / 2.0;
  double q = numeric::bisect(residual, lo, hi, 1e-12 * std::max(1.0, lo));
  for (int i = 0; i < 2; ++i) {
    const double slope = q / ((1.0 + q) * (1.0 + q));
    if (!(slope > 0.0)) break;
    const double next = q - residual(q) / slope;
    if (next > 0.0 && std::abs(residual(next)) <= std::abs(residual(q))) q = next;
  }
  return {q, pi};
}

/// dQ/dpi = (1+Q)^2 / Q.
inline double q_slope(double pi) {
  const double q = solve_q(pi).q;
  if (q == 0.0) fail(ErrorKind::DomainError, "q_slope: unbounded at zero price");
  return (1.0 + q) * (1.0 + q) / q;
}

/// Payoff-maximizing demand of a user with characteristic g at price pi.
inline DemandResult optimal_demand(double g, double pi, SnrModel model) {
  detail::require_positive(g, "g");
  detail::require_price(pi);
  if (model == SnrModel::HighSnr) {
    const double w = g * std::exp(-(1.0 + pi));
    return {w, w, std::exp(1.0 + pi)};
  }
  const double q = solve_q(pi).q;
  if (q == 0.0) fail(ErrorKind::UnboundedDemand, "general-SNR demand is unbounded at zero price");
  const double w = g / q;
  return {w, w * (std::log1p(q) - pi), q};
}

/// Aggregate demand G e^{-(1+pi)} (high SNR) or G / Q(pi) (general).
inline double total_demand(double G, double pi, SnrModel model) { return optimal_demand(G, pi, model).w; }

inline double revenue_at_price(double G, double pi, SnrModel model) { return pi * total_demand(G, pi, model); }

/// Derivative of general-SNR revenue with respect to total bandwidth b.
inline double marginal_revenue_of_bandwidth(double G, double b) {
  detail::require_positive(G, "G");
  detail::require_positive(b, "bandwidth");
  const double u = b / G;
  const double inv = 1.0 / (1.0 + u);
  return std::log1p(1.0 / u) - inv - inv * inv;
}

/// Revenue peak of the general-SNR demand curve.
struct GeneralSnrPeak {
  double q;               ///< common SNR at the peak
  double price;           ///< revenue-maximizing price
  double supply_per_g;    ///< total demand / G at the peak
};

/// Computed once per process as the positive root of
/// 2Q^2 + Q - (1+Q)^2 ln(1+Q) = 0.
inline const GeneralSnrPeak& general_snr_peak() {
  static const GeneralSnrPeak peak = [] {
    auto h = [](double q) { return 2.0 * q * q + q - (1.0 + q) * (1.0 + q) * std::log1p(q); };
    const double q = numeric::bisect(h, 1.0, 10.0, 1e-15);
    return GeneralSnrPeak{q, price_at_q(q), 1.0 / q};
  }();
  return peak;
}

}  // namespace cmvno

#pragma once

// Market instance: users, costs, sensing-uncertainty law and SNR model.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cmvno/error.hpp"
#include "cmvno/numeric.hpp"
#include "cmvno/rng.hpp"

namespace cmvno {

enum class SnrModel { HighSnr, General };

/// One secondary user. g = p_max * h / n0 is always derived, never stored.
class UserProfile {
 public:
  UserProfile(double p_max, double h, double n0) : p_max_(p_max), h_(h), n0_(n0) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(p_max) || !positive(h) || !positive(n0)) {
      fail(ErrorKind::InvalidProfile, "user profile fields p_max, h, n0 must be finite and positive");
    }
  }

  /// Profile with the given characteristic (h = n0 = 1).
  static UserProfile from_g(double g) { return UserProfile(g, 1.0, 1.0); }

  double p_max() const { return p_max_; }
  double h() const { return h_; }
  double n0() const { return n0_; }
  double g() const { return p_max_ * h_ / n0_; }

  UserProfile with_p_max(double p_max) const { return UserProfile(p_max, h_, n0_); }

 private:
  double p_max_;
  double h_;
  double n0_;
};

struct CostParams {
  double c_s = 0.0;  ///< sensing cost per unit bandwidth
  double c_l = 0.0;  ///< leasing cost per unit bandwidth

  static CostParams make(double c_s, double c_l) {
    if (!std::isfinite(c_s) || !std::isfinite(c_l) || c_s < 0.0 || c_l < 0.0) {
      fail(ErrorKind::InvalidCosts, "costs must be finite and non-negative");
    }
    return {c_s, c_l};
  }

  /// Smallest sensing cost for which the closed-form sensing policy applies.
  static double sensing_cost_bound(double c_l) { return -std::expm1(-2.0 * c_l) / 4.0; }

  bool low_bound_ok() const { return c_s >= sensing_cost_bound(c_l); }
};

/// Law of the sensing realization factor on [0, 1].
class AlphaDistribution {
 public:
  struct Uniform01 {};
  struct Beta {
    double a;
    double b;
  };
  struct Discrete {
    std::vector<double> points;
    std::vector<double> probs;
  };
  using Variant = std::variant<Uniform01, Beta, Discrete>;

  AlphaDistribution() : law_(Uniform01{}) {}

  static AlphaDistribution uniform() { return AlphaDistribution(Uniform01{}); }

  static AlphaDistribution beta(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
      fail(ErrorKind::InvalidDistribution, "beta shape parameters must be positive");
    }
    return AlphaDistribution(Beta{a, b});
  }

  static AlphaDistribution discrete(std::vector<double> points, std::vector<double> probs) {
    if (points.empty() || points.size() != probs.size()) {
      fail(ErrorKind::InvalidDistribution, "discrete law needs matching non-empty points and probs");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i] >= 0.0 && points[i] <= 1.0)) fail(ErrorKind::InvalidDistribution, "discrete support must lie in [0,1]");
      if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) fail(ErrorKind::InvalidDistribution, "probabilities must be non-negative");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::InvalidDistribution, "probabilities must sum to 1");
    return AlphaDistribution(Discrete{std::move(points), std::move(probs)});
  }

  const Variant& law() const { return law_; }

  double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform01>) {
            return 0.5;
          } else if constexpr (std::is_same_v<T, Beta>) {
            return d.a / (d.a + d.b);
          } else {
            return std::inner_product(d.points.begin(), d.points.end(), d.probs.begin(), 0.0);
          }
        },
        law_);
  }

 private:
  explicit AlphaDistribution(Variant law) : law_(std::move(law)) {}
  Variant law_;
};

/// Sum of the users' characteristics.
inline double aggregate_g(std::span<const UserProfile> users) {
  if (users.empty()) fail(ErrorKind::EmptyPopulation, "user population is empty");
  double total = 0.0;
  for (const auto& u : users) total += u.g();
  return total;
}

/// Validated market instance. Immutable after construction.
class Scenario {
 public:
  Scenario(std::vector<UserProfile> users, CostParams costs, AlphaDistribution alpha, SnrModel snr_model)
      : users_(std::move(users)), costs_(CostParams::make(costs.c_s, costs.c_l)), alpha_(std::move(alpha)),
        snr_model_(snr_model), g_total_(aggregate_g(users_)) {}

  const std::vector<UserProfile>& users() const { return users_; }
  const CostParams& costs() const { return costs_; }
  const AlphaDistribution& alpha() const { return alpha_; }
  SnrModel snr_model() const { return snr_model_; }
  double G() const { return g_total_; }

  Scenario with_costs(CostParams costs) const { return Scenario(users_, costs, alpha_, snr_model_); }
  Scenario with_alpha(AlphaDistribution alpha) const { return Scenario(users_, costs_, std::move(alpha), snr_model_); }
  Scenario with_snr_model(SnrModel model) const { return Scenario(users_, costs_, alpha_, model); }

  /// Every user's transmit power multiplied by k (scales G by k).
  Scenario scaled(double k) const {
    std::vector<UserProfile> users;
    users.reserve(users_.size());
    for (const auto& u : users_) users.push_back(u.with_p_max(u.p_max() * k));
    return Scenario(std::move(users), costs_, alpha_, snr_model_);
  }

 private:
  std::vector<UserProfile> users_;
  CostParams costs_;
  AlphaDistribution alpha_;
  SnrModel snr_model_;
  double g_total_;
};

struct QuadratureOptions {
  int nodes = 64;  ///< nodes per smooth segment
};

/// E[f(alpha)], integrating each segment between the sorted `breakpoints`
/// separately. Uniform uses composite Gauss-Legendre with `opts.nodes`
/// nodes; Beta weights f by the density under tanh-sinh quadrature, which
/// absorbs the density's endpoint singularities. Discrete laws sum exactly.
template <numeric::ScalarFunction F>
double alpha_expectation(const AlphaDistribution& dist, F&& f, std::span<const double> breakpoints = {},
                         QuadratureOptions opts = {}) {
  std::vector<double> cuts{0.0};
  for (double b : breakpoints) {
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());

  auto checked = [](double v) {
    if (!std::isfinite(v)) fail(ErrorKind::QuadratureFailure, "expectation integrand is non-finite");
    return v;
  };

  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AlphaDistribution::Uniform01>) {
          double total = 0.0;
          for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += numeric::integrate(f, cuts[i], cuts[i + 1], opts.nodes);
          return checked(total);
        } else if constexpr (std::is_same_v<T, AlphaDistribution::Beta>) {
          const double log_norm = std::lgamma(d.a + d.b) - std::lgamma(d.a) - std::lgamma(d.b);
          thread_local boost::math::quadrature::tanh_sinh<double> rule;
          double total = 0.0;
          for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = cuts[i];
            const double hi = cuts[i + 1];
            if (!(hi > lo)) continue;
            // xc is lo - x on the left half of the segment and hi - x on the right.
            auto weighted = [&](double x, double xc) -> double {
              const double left = xc < 0.0 && lo == 0.0 ? -xc : x;
              const double right = xc > 0.0 && hi == 1.0 ? xc : 1.0 - x;
              if (left <= 0.0 || right <= 0.0) return 0.0;
              return f(x) * std::exp(log_norm + (d.a - 1.0) * std::log(left) + (d.b - 1.0) * std::log(right));
            };
            total += rule.integrate(weighted, lo, hi);
          }
          return checked(total);
        } else {
          double total = 0.0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] > 0.0) total += d.probs[i] * checked(f(d.points[i]));
          }
          return total;
        }
      },
      dist.law());
}

/// One draw of alpha; inverse-CDF for Beta, so results depend only on the stream.
inline double alpha_sample(const AlphaDistribution& dist, CounterRng& stream) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        const double u = stream.next_double();
        if constexpr (std::is_same_v<T, AlphaDistribution::Uniform01>) {
          return u;
        } else if constexpr (std::is_same_v<T, AlphaDistribution::Beta>) {
          return boost::math::quantile(boost::math::beta_distribution<double>(d.a, d.b), u);
        } else {
          double cumulative = 0.0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            cumulative += d.probs[i];
            if (u < cumulative) return d.points[i];
          }
          for (std::size_t i = d.points.size(); i-- > 0;) {
            if (d.probs[i] > 0.0) return d.points[i];
          }
          return d.points.back();
        }
      },
      dist.law());
}

}  // namespace cmvno

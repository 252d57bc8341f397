#pragma once

// Scalar root finding, 1-D maximization and fixed-node quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "cmvno/error.hpp"

namespace cmvno::numeric {

template <class F>
concept ScalarFunction = std::invocable<F, double> && std::convertible_to<std::invoke_result_t<F, double>, double>;

/// Bisection for a sign change of `f` on [lo, hi]. Stops once the bracket is
/// narrower than `width`. Throws BracketFailure if the endpoints share a sign.
template <ScalarFunction F>
double bisect(F&& f, double lo, double hi, double width = 1e-12, int max_iter = 400) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) fail(ErrorKind::BracketFailure, "bisect: non-finite endpoint value");
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) fail(ErrorKind::BracketFailure, "bisect: no sign change on bracket");
  for (int i = 0; i < max_iter && hi - lo > width; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (!std::isfinite(f_mid)) fail(ErrorKind::BracketFailure, "bisect: non-finite interior value");
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct MaximizeResult {
  double argmax;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// The endpoints are compared against the interior optimum, so maxima on the
/// boundary are returned exactly.
template <ScalarFunction F>
MaximizeResult golden_section_max(F&& f, double lo, double hi, double tol, int max_iter = 500) {
  constexpr double inv_phi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int iter = 0;
  while (b - a > tol && iter++ < max_iter) {
    if (!std::isfinite(fc) || !std::isfinite(fd)) fail(ErrorKind::OptimizerStall, "golden section: non-finite objective");
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (b - a > tol) fail(ErrorKind::OptimizerStall, "golden section: bracket did not shrink below tolerance");
  MaximizeResult best{0.5 * (a + b), f(0.5 * (a + b))};
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx > best.value) best = {x, fx};
  }
  if (!std::isfinite(best.value)) fail(ErrorKind::OptimizerStall, "golden section: non-finite objective");
  return best;
}

/// Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }
};

inline constexpr std::size_t kPanelOrder = 8;

/// Composite Gauss-Legendre integral of `f` over [a, b] using `nodes` points
/// (rounded up to a whole number of 8-point panels).
template <ScalarFunction F>
double integrate(F&& f, double a, double b, int nodes = 64) {
  if (!(b > a)) return 0.0;
  const auto& rule = GaussLegendre<kPanelOrder>::instance();
  const int panels = std::max(1, (nodes + static_cast<int>(kPanelOrder) - 1) / static_cast<int>(kPanelOrder));
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double left = a + p * width;
    const double half = 0.5 * width;
    const double mid = left + half;
    double panel = 0.0;
    for (std::size_t i = 0; i < kPanelOrder; ++i) {
      const double v = f(mid + half * rule.nodes[i]);
      if (!std::isfinite(v)) fail(ErrorKind::QuadratureFailure, "quadrature node produced a non-finite value");
      panel += rule.weights[i] * v;
    }
    total += half * panel;
  }
  return total;
}

}  // namespace cmvno::numeric

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cmvno/simulator.hpp"

using namespace cmvno;

namespace {

Scenario market(double c_s, double c_l, AlphaDistribution alpha = AlphaDistribution::uniform(),
                SnrModel model = SnrModel::HighSnr) {
  return Scenario({UserProfile::from_g(1.0)}, CostParams::make(c_s, c_l), std::move(alpha), model);
}

CostParams random_low_costs(CounterRng& rng) {
  const double c_l = 0.5 + 2.5 * rng.next_double();
  const double lo = CostParams::sensing_cost_bound(c_l);
  return CostParams::make(lo + (c_l / 2 - lo) * rng.next_double(), c_l);
}

}  // namespace

TEST(RealizedProfit, Examples) {
  const auto s = market(0.8, 2.0);
  EXPECT_NEAR(realized_profit(s, 0.0407, 0.0), -0.01424, 2e-5);
  EXPECT_NEAR(realized_profit(s, 0.0407137869571, 0.0), -0.01425539, 1e-8);
  EXPECT_NEAR(realized_profit(s, 0.0407, 1.0), 0.0570, 1e-4);
  const double kink = std::exp(-4.0) / 0.0407;
  EXPECT_NEAR(realized_profit(s, 0.0407, kink * (1 - 1e-12)), realized_profit(s, 0.0407, kink * (1 + 1e-12)), 1e-9);
}

TEST(RealizedProfit, IncreasingInAlpha) {
  CounterRng rng(6, 0);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_low_costs(rng);
    const auto s = market(c.c_s, c.c_l);
    const double b_s = stage1_sense(s).b_s_star;
    if (b_s <= std::exp(-(2 + c.c_l))) continue;
    double prev = realized_profit(s, b_s, 0.0);
    for (int k = 1; k <= 1000; ++k) {
      const double v = realized_profit(s, b_s, k / 1000.0);
      EXPECT_GT(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(Baseline, Examples) {
  auto b = baseline_outcome(market(0.8, 2.0));
  EXPECT_EQ(b.pi, 3.0);
  EXPECT_NEAR(b.profit, 0.018316, 1e-6);
  b = baseline_outcome(market(0.3, 1.0));
  EXPECT_EQ(b.pi, 2.0);
  EXPECT_NEAR(b.profit, 0.049787, 1e-6);
  b = baseline_outcome(market(0.3, 1.0, AlphaDistribution::uniform(), SnrModel::General));
  EXPECT_NEAR(b.pi, price_at_q(1.0 / 0.063), 2e-3);
  EXPECT_NEAR(b.pi, 1.884979782, 1e-8);
}

TEST(AlphaThreshold, Examples) {
  const auto s = market(0.8, 2.0);
  const double a = find_alpha_th(s);
  EXPECT_NEAR(a, 0.40, 0.01);
  EXPECT_NEAR(a, 0.4, 1e-7);
  EXPECT_NEAR(realized_profit(s, stage1_sense(s).b_s_star, a), baseline_outcome(s).profit, 1e-9);
  try {
    find_alpha_th(market(1.2, 2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoThreshold);
  }
}

TEST(AlphaThreshold, FullRealizationBeatsBaseline) {
  CounterRng rng(61, 0);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_low_costs(rng);
    if (c.c_s >= c.c_l / 2) continue;
    const auto s = market(c.c_s, c.c_l);
    const auto d = stage1_sense(s);
    EXPECT_GT(realized_profit(s, d.b_s_star, 1.0), baseline_outcome(s).profit);
    const double a = find_alpha_th(s, d);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, 1.0);
  }
}

TEST(Run, SlotInvariants) {
  CounterRng rng(8, 0);
  for (int i = 0; i < 50; ++i) {
    const auto c = random_low_costs(rng);
    const auto s = market(c.c_s, c.c_l);
    const auto trace = run(s, 200, 100 + i);
    const double base_payoff = optimal_demand(1.0, 1 + c.c_l, SnrModel::HighSnr).payoff;
    double total = 0.0;
    for (const auto& r : trace.records) {
      EXPECT_LE(r.pi, 1 + c.c_l + 1e-12);
      EXPECT_GE(r.user_payoffs.at(0), base_payoff - 1e-15);
      total += r.profit_realized;
    }
    EXPECT_EQ(trace.mean_profit, total / 200.0);
  }
}

TEST(Run, PointMassMatchesEquilibrium) {
  const auto s = market(0.8, 2.0, AlphaDistribution::discrete({0.7}, {1.0}));
  const auto trace = run(s, 1, 3);
  const auto eq = equilibrium_at(s, 0.7);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].alpha, 0.7);
  EXPECT_EQ(trace.records[0].pi, eq.pi);
  EXPECT_EQ(trace.records[0].b_l, eq.b_l);
  EXPECT_EQ(trace.records[0].profit_realized, eq.operator_profit_realized);
}

TEST(Run, ReproducibleAcrossThreadCounts) {
  const auto s = market(0.48, 1.0);
  const auto a = run(s, 500, 7, 1);
  const auto b = run(s, 500, 7, 4);
  std::ostringstream ca;
  std::ostringstream cb;
  write_trace_csv(ca, a);
  write_trace_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.price_change_slots, b.price_change_slots);
  const auto c = run(s, 500, 8, 1);
  EXPECT_NE(a.records[0].alpha, c.records[0].alpha);
  EXPECT_THROW(run(s, 0, 1), Error);
}

TEST(Run, PriceChangeFrequency) {
  auto t = run(market(0.48, 1.0), 10000, 1);
  EXPECT_NEAR(t.price_change_slots / 10000.0, 0.19287, 0.02);
  t = run(market(0.35, 1.0), 10000, 1);
  EXPECT_NEAR(t.price_change_slots / 10000.0, 0.48765, 0.02);
}

TEST(Run, SensingDominatesBaselineOnAverage) {
  for (const auto& c : {CostParams::make(0.8, 2.0), CostParams::make(0.48, 1.0), CostParams::make(0.3, 0.7)}) {
    const auto s = market(c.c_s, c.c_l);
    const std::size_t n = 100000;
    const auto t = run(s, n, 2);
    double var = 0.0;
    for (const auto& r : t.records) var += (r.profit_realized - t.mean_profit) * (r.profit_realized - t.mean_profit);
    const double se = std::sqrt(var / (n - 1) / n);
    EXPECT_GT(t.mean_profit, t.mean_profit_baseline - 3 * se);
    EXPECT_GT(t.mean_profit, t.mean_profit_baseline);
  }
}

TEST(RealizedProfit, CrossingOfSensingCosts) {
  const auto cheap = market(0.5, 2.0);
  const auto dear = market(0.8, 2.0);
  const double b_cheap = stage1_sense(cheap).b_s_star;
  const double b_dear = stage1_sense(dear).b_s_star;
  EXPECT_GT(b_cheap, b_dear);
  EXPECT_LT(realized_profit(cheap, b_cheap, 0.0), realized_profit(dear, b_dear, 0.0));
  EXPECT_GT(realized_profit(cheap, b_cheap, 1.0), realized_profit(dear, b_dear, 1.0));
}

TEST(Sweep, SensingCostAxis) {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.2 + 0.05 * i);
  const auto rows = sweep(market(0.8, 2.0), SweepAxis::SensingCost, grid);
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].bs_over_g, rows[i - 1].bs_over_g + 1e-15);
    const double gain = rows[i].eprofit_over_g - rows[i].baseline_over_g;
    const double prev_gain = rows[i - 1].eprofit_over_g - rows[i - 1].baseline_over_g;
    EXPECT_LE(gain, prev_gain + 1e-15);
  }
  for (const auto& r : rows) {
    if (r.value > 1.0 + 1e-9) {
      EXPECT_EQ(r.bs_over_g, 0.0);
      EXPECT_NEAR(r.eprofit_over_g, r.baseline_over_g, 1e-15);
    }
    EXPECT_EQ(r.axis, "cs");
  }
}

TEST(Sweep, AlphaAxisPriceShape) {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  const auto rows = sweep(market(0.8, 2.0), SweepAxis::Alpha, grid);
  const double kink = 0.4498633;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].value <= kink) {
      EXPECT_NEAR(rows[i].pi, 3.0, 1e-12);
    } else {
      EXPECT_LT(rows[i].pi, rows[i - 1].pi);
    }
  }
  EXPECT_NEAR(rows.back().pi, 2.201188498, 1e-9);
}

TEST(Sweep, TwoAxesAndNormalization) {
  const auto rows = sweep(market(0.8, 2.0), SweepAxis::LeasingCost, {1.0, 2.0}, SweepAxis::SensingCost, {0.3, 0.5, 0.9});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].axis, "cs@cl=1");
  EXPECT_EQ(rows[5].axis, "cs@cl=2");
  const Scenario big({UserProfile::from_g(4.0), UserProfile::from_g(6.0)}, CostParams::make(0.8, 2.0),
                     AlphaDistribution::uniform(), SnrModel::HighSnr);
  const auto a = sweep(market(0.8, 2.0), SweepAxis::SensingCost, {0.3, 0.6});
  const auto b = sweep(big, SweepAxis::SensingCost, {0.3, 0.6});
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].bs_over_g, b[i].bs_over_g, 1e-12);
    EXPECT_NEAR(a[i].eprofit_over_g, b[i].eprofit_over_g, 1e-12);
    EXPECT_NEAR(a[i].payoff_over_g, b[i].payoff_over_g, 1e-12);
  }
  EXPECT_THROW(sweep(market(0.8, 2.0), SweepAxis::Alpha, {}), Error);
  EXPECT_THROW(sweep(market(0.8, 2.0), SweepAxis::Alpha, {0.1}, SweepAxis::Alpha, {0.2}), Error);
}

TEST(Csv, Headers) {
  std::ostringstream trace;
  write_trace_csv(trace, run(market(0.8, 2.0), 2, 1));
  EXPECT_EQ(trace.str().substr(0, trace.str().find('\n')), "slot,alpha,b_l,pi,profit,profit_baseline");
  std::ostringstream table;
  write_sweep_csv(table, sweep(market(0.8, 2.0), SweepAxis::SensingCost, {0.5}));
  EXPECT_EQ(table.str().substr(0, table.str().find('\n')),
            "axis,value,bs_over_g,bl_over_g,pi,eprofit_over_g,baseline_over_g,payoff_over_g");
}

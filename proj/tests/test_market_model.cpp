#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cmvno/market_model.hpp"
#include "cmvno/scenario_io.hpp"

using namespace cmvno;

namespace {

Scenario one_user(double c_s = 0.8, double c_l = 2.0) {
  return Scenario({UserProfile::from_g(1.0)}, CostParams::make(c_s, c_l), AlphaDistribution::uniform(),
                  SnrModel::HighSnr);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Parse;
}

}  // namespace

TEST(UserProfile, CharacteristicFromFields) {
  EXPECT_DOUBLE_EQ(UserProfile(1, 1, 1).g(), 1.0);
  EXPECT_DOUBLE_EQ(UserProfile(2, 0.5, 0.25).g(), 4.0);
}

TEST(UserProfile, RejectsNonPositiveFields) {
  EXPECT_EQ(kind_of([] { UserProfile(0, 1, 1); }), ErrorKind::InvalidProfile);
  EXPECT_EQ(kind_of([] { UserProfile(1, -1, 1); }), ErrorKind::InvalidProfile);
  EXPECT_EQ(kind_of([] { UserProfile(1, 1, NAN); }), ErrorKind::InvalidProfile);
}

TEST(Scenario, AggregateCharacteristic) {
  EXPECT_DOUBLE_EQ(one_user().G(), 1.0);
  Scenario two({UserProfile::from_g(1), UserProfile::from_g(3)}, CostParams::make(0.5, 1), AlphaDistribution::uniform(),
               SnrModel::HighSnr);
  EXPECT_DOUBLE_EQ(two.G(), 4.0);
  Scenario single({UserProfile(2, 0.5, 0.25)}, CostParams::make(0.5, 1), AlphaDistribution::uniform(), SnrModel::HighSnr);
  EXPECT_DOUBLE_EQ(single.G(), 4.0);
}

TEST(Scenario, RejectsEmptyPopulationAndBadCosts) {
  EXPECT_EQ(kind_of([] { Scenario({}, CostParams::make(0.5, 1), AlphaDistribution::uniform(), SnrModel::HighSnr); }),
            ErrorKind::EmptyPopulation);
  EXPECT_EQ(kind_of([] { CostParams::make(-0.1, 1); }), ErrorKind::InvalidCosts);
  EXPECT_EQ(kind_of([] { CostParams::make(0.1, INFINITY); }), ErrorKind::InvalidCosts);
  EXPECT_EQ(kind_of([] { Scenario({UserProfile::from_g(1)}, CostParams{-1, 1}, {}, SnrModel::HighSnr); }),
            ErrorKind::InvalidCosts);
}

TEST(Scenario, ScalingPowerScalesAggregate) {
  Scenario s({UserProfile(1.3, 0.7, 0.2), UserProfile(0.4, 2.0, 1.1), UserProfile::from_g(2.5)},
             CostParams::make(0.4, 1.2), AlphaDistribution::uniform(), SnrModel::HighSnr);
  for (double k : {1e-3, 0.37, 1.0, 2.0, 10.0, 123.456}) {
    EXPECT_NEAR(s.scaled(k).G(), k * s.G(), 1e-13 * k * s.G()) << k;
  }
}

TEST(CostParams, LowBoundFlag) {
  EXPECT_NEAR(CostParams::sensing_cost_bound(2.0), 0.2454211, 1e-7);
  EXPECT_NEAR(CostParams::sensing_cost_bound(1.0), 0.2161662, 1e-7);
  EXPECT_TRUE(CostParams::make(0.25, 2).low_bound_ok());
  EXPECT_FALSE(CostParams::make(0.2, 2).low_bound_ok());
  EXPECT_TRUE(CostParams::make(0.0, 0.0).low_bound_ok());
}

TEST(AlphaDistribution, Validation) {
  EXPECT_EQ(kind_of([] { AlphaDistribution::beta(0, 1); }), ErrorKind::InvalidDistribution);
  EXPECT_EQ(kind_of([] { AlphaDistribution::discrete({0.2, 1.2}, {0.5, 0.5}); }), ErrorKind::InvalidDistribution);
  EXPECT_EQ(kind_of([] { AlphaDistribution::discrete({0.2, 0.8}, {0.5, 0.4}); }), ErrorKind::InvalidDistribution);
  EXPECT_EQ(kind_of([] { AlphaDistribution::discrete({}, {}); }), ErrorKind::InvalidDistribution);
  EXPECT_NO_THROW(AlphaDistribution::discrete({0.2, 0.8}, {0.5, 0.5 + 5e-13}));
}

TEST(AlphaDistribution, Means) {
  EXPECT_EQ(AlphaDistribution::uniform().mean(), 0.5);
  EXPECT_DOUBLE_EQ(AlphaDistribution::beta(2, 6).mean(), 0.25);
  EXPECT_DOUBLE_EQ(AlphaDistribution::discrete({0.2, 0.8}, {0.25, 0.75}).mean(), 0.65);
}

TEST(AlphaExpectation, Moments) {
  auto id = [](double a) { return a; };
  auto sq = [](double a) { return a * a; };
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::uniform(), id), 0.5, 1e-14);
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::discrete({0.2, 0.8}, {0.5, 0.5}), id), 0.5, 1e-14);
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::uniform(), sq), 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::beta(2, 2), sq), 0.3, 1e-9);
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::beta(3, 1.5), id), 3.0 / 4.5, 1e-9);
}

TEST(AlphaExpectation, ConstantIntegratesToOne) {
  auto one = [](double) { return 1.0; };
  const std::vector<double> cuts{0.3, 0.45, 2.0};
  for (const auto& d : {AlphaDistribution::uniform(), AlphaDistribution::beta(2, 2), AlphaDistribution::beta(0.5, 0.5),
                        AlphaDistribution::beta(5, 1), AlphaDistribution::discrete({0.1, 0.9}, {0.3, 0.7})}) {
    EXPECT_NEAR(alpha_expectation(d, one), 1.0, 1e-10);
    EXPECT_NEAR(alpha_expectation(d, one, cuts), 1.0, 1e-10);
  }
}

TEST(AlphaExpectation, KinkedIntegrandIsExactWithCuts) {
  auto kinked = [](double a) { return std::max(0.0, a - 0.3); };
  EXPECT_NEAR(alpha_expectation(AlphaDistribution::uniform(), kinked, std::vector<double>{0.3}), 0.245, 1e-14);
}

TEST(AlphaExpectation, NonFiniteIntegrandFails) {
  auto bad = [](double) { return NAN; };
  EXPECT_EQ(kind_of([&] { alpha_expectation(AlphaDistribution::uniform(), bad); }), ErrorKind::QuadratureFailure);
}

TEST(AlphaSample, PointMassAndDeterminism) {
  CounterRng rng(11, 3);
  const auto mass = AlphaDistribution::discrete({0.7}, {1.0});
  for (int i = 0; i < 10; ++i) EXPECT_EQ(alpha_sample(mass, rng), 0.7);
  CounterRng a(5, 9);
  CounterRng b(5, 9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(alpha_sample(AlphaDistribution::uniform(), a), alpha_sample(AlphaDistribution::uniform(), b));
}

TEST(AlphaSample, BetaMean) {
  CounterRng rng(2024, 0);
  const auto law = AlphaDistribution::beta(2, 2);
  double total = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double a = alpha_sample(law, rng);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
    total += a;
  }
  EXPECT_NEAR(total / n, 0.5, 0.01);
}

TEST(AlphaSample, DiscreteFrequencies) {
  CounterRng rng(3, 1);
  const auto law = AlphaDistribution::discrete({0.1, 0.5, 0.9}, {0.2, 0.3, 0.5});
  int count[3] = {0, 0, 0};
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double a = alpha_sample(law, rng);
    count[a < 0.3 ? 0 : a < 0.7 ? 1 : 2]++;
  }
  EXPECT_NEAR(count[0] / double(n), 0.2, 0.01);
  EXPECT_NEAR(count[1] / double(n), 0.3, 0.01);
  EXPECT_NEAR(count[2] / double(n), 0.5, 0.01);
}

TEST(ScenarioJson, ParsesAllForms) {
  const auto s = scenario_from_string(R"({
    "users": [{"p_max": 2, "h": 0.5, "n0": 0.25}, {"p_max": 1, "h": 1, "n0": 1}],
    "costs": {"c_s": 0.3, "c_l": 1.5},
    "alpha": {"type": "beta", "params": {"a": 2, "b": 3}},
    "snr_model": "general"})");
  EXPECT_DOUBLE_EQ(s.G(), 5.0);
  EXPECT_EQ(s.snr_model(), SnrModel::General);
  EXPECT_DOUBLE_EQ(s.alpha().mean(), 0.4);

  const auto shorthand = scenario_from_string(R"({"users": {"g": [1, 3]}, "costs": {"c_s": 0.8, "c_l": 2}})");
  EXPECT_DOUBLE_EQ(shorthand.G(), 4.0);
  EXPECT_EQ(shorthand.snr_model(), SnrModel::HighSnr);
  EXPECT_EQ(shorthand.alpha().mean(), 0.5);
}

TEST(ScenarioJson, Errors) {
  EXPECT_EQ(kind_of([] { scenario_from_string("{not json"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { scenario_from_string(R"({"users": {"g": [1]}, "costs": {"c_s": 1, "c_l": 2}, "x": 1})"); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { scenario_from_string(R"({"users": {"g": [1]}})"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { scenario_from_string(R"({"users": {"g": [1]}, "costs": {"c_s": "a", "c_l": 2}})"); }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([] {
              scenario_from_string(R"({"users": {"g": [1]}, "costs": {"c_s": 1, "c_l": 2}, "snr_model": "low"})");
            }),
            ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { scenario_from_string(R"({"users": {"g": [-1]}, "costs": {"c_s": 1, "c_l": 2}})"); }),
            ErrorKind::InvalidProfile);
  EXPECT_EQ(kind_of([] { scenario_from_string(R"({"users": {"g": []}, "costs": {"c_s": 1, "c_l": 2}})"); }),
            ErrorKind::EmptyPopulation);
  EXPECT_EQ(kind_of([] {
              scenario_from_string(
                  R"({"users": {"g": [1]}, "costs": {"c_s": 1, "c_l": 2}, "alpha": {"type": "beta", "params": {"a": -1, "b": 1}}})");
            }),
            ErrorKind::InvalidDistribution);
}

TEST(ScenarioJson, RoundTrip) {
  const Scenario s({UserProfile(2, 0.5, 0.25), UserProfile::from_g(0.3)}, CostParams::make(0.3, 1.1),
                   AlphaDistribution::discrete({0.1, 0.6}, {0.4, 0.6}), SnrModel::General);
  const auto back = scenario_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
  EXPECT_DOUBLE_EQ(back.G(), s.G());
}

TEST(AlphaExpectation, BetaShapes) {
  auto id = [](double a) { return a; };
  for (auto [a, b] : {std::pair{0.5, 0.5}, std::pair{5.0, 1.0}, std::pair{1.0, 3.0}, std::pair{0.7, 2.2}}) {
    EXPECT_NEAR(alpha_expectation(AlphaDistribution::beta(a, b), id), a / (a + b), 1e-10) << a << " " << b;
    EXPECT_NEAR(alpha_expectation(AlphaDistribution::beta(a, b), id, std::vector<double>{0.25, 0.8}), a / (a + b), 1e-10);
  }
}

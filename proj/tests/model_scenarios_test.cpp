#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "qsuc/model.hpp"
#include "qsuc/scenarios.hpp"

using namespace qsuc;

namespace {

SucInstance four_unit_day() {
  SucInstance inst;
  inst.horizon = 24;
  inst.shed_cost = 10.0;
  for (std::size_t g = 0; g < 4; ++g)
    inst.generators.push_back({g, 0.01, 1.0 + 0.3 * static_cast<double>(g), 0.2, 0.1, 1.0, 0.5, -0.5});
  return inst;
}

bool mentions(const std::vector<std::string>& v, const std::string& s) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& e) { return e.find(s) != std::string::npos; });
}

}  // namespace

TEST(Model, WellFormedInstanceHasNoViolations) { EXPECT_TRUE(validate_instance(four_unit_day()).empty()); }

TEST(Model, MinAboveMaxIsReported) {
  auto inst = four_unit_day();
  inst.generators[1].p_min = 2.0;
  inst.generators[1].ramp_up = 3.0;
  inst.generators[1].ramp_down = -3.0;
  const auto v = validate_instance(inst);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(mentions(v, "p_min/p_max"));
}

TEST(Model, ZeroShedCostBreaksLastResortRule) {
  auto inst = four_unit_day();
  inst.shed_cost = 0.0;
  EXPECT_TRUE(mentions(validate_instance(inst), "shed_cost"));
}

TEST(Model, RampSignConventions) {
  auto inst = four_unit_day();
  inst.generators[0].ramp_down = 0.5;
  inst.generators[2].ramp_up = -0.1;
  const auto v = validate_instance(inst);
  EXPECT_TRUE(mentions(v, "generators[0].ramp_down"));
  EXPECT_TRUE(mentions(v, "generators[2].ramp_up"));
}

TEST(Model, NonFiniteFloorAndNegativeQuadratic) {
  auto inst = four_unit_day();
  inst.lb_floor = std::numeric_limits<double>::infinity();
  inst.generators[3].c_quad = -1.0;
  const auto v = validate_instance(inst);
  EXPECT_TRUE(mentions(v, "lb_floor"));
  EXPECT_TRUE(mentions(v, "c_quad"));
}

TEST(Model, ValidationIsPure) {
  auto inst = four_unit_day();
  inst.shed_cost = -1.0;
  EXPECT_EQ(validate_instance(inst), validate_instance(inst));
}

TEST(Model, CommitmentVariableCount) {
  EXPECT_EQ(num_commitment_vars(four_unit_day()), 96u);
  SucInstance one;
  one.generators.resize(1);
  one.horizon = 1;
  EXPECT_EQ(num_commitment_vars(one), 1u);
  SucInstance twelve;
  twelve.generators.resize(12);
  twelve.horizon = 24;
  EXPECT_EQ(num_commitment_vars(twelve), 288u);
  EXPECT_EQ(commitment_index(twelve, 2, 5), 53u);
}

TEST(Scenarios, PowerCurvePieces) {
  PowerCurve c;
  EXPECT_EQ(turbine_power(c, 2.9), 0.0);
  EXPECT_EQ(turbine_power(c, 25.1), 0.0);
  EXPECT_EQ(turbine_power(c, 12.0), 1.0);
  EXPECT_EQ(turbine_power(c, 20.0), 1.0);
  EXPECT_NEAR(turbine_power(c, 3.0), 0.0, 1e-15);
  EXPECT_NEAR(turbine_power(c, 8.0), (512.0 - 27.0) / (1728.0 - 27.0), 1e-12);
}

TEST(Scenarios, SaturatedWindGivesRatedPower) {
  WindParams w;
  w.shape = 50.0;  // very peaked around the scale
  w.scale = 18.0;
  w.turbine.rated_power = 2.5;
  for (double v : sample_wind_series(w, 24, 3)) EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(Scenarios, CalmWindGivesZero) {
  WindParams w;
  w.shape = 50.0;
  w.scale = 1.0;
  for (double v : sample_wind_series(w, 24, 3)) EXPECT_EQ(v, 0.0);
}

TEST(Scenarios, WindIsReproducible) {
  WindParams w;
  EXPECT_EQ(sample_wind_series(w, 24, 42), sample_wind_series(w, 24, 42));
  EXPECT_NE(sample_wind_series(w, 24, 42), sample_wind_series(w, 24, 43));
}

TEST(Scenarios, InvalidWindParameters) {
  WindParams w;
  w.shape = 0.0;
  EXPECT_THROW(sample_wind_series(w, 4, 1), InvalidArgument);
  w = {};
  w.turbine.rated_speed = 30.0;
  EXPECT_THROW(sample_wind_series(w, 4, 1), InvalidArgument);
}

TEST(Scenarios, DegenerateLoadIntervalIsConstant) {
  LoadParams l{2.0, 5.0, 3.0, 3.0};
  for (double v : sample_load_series(l, 24, 9)) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Scenarios, UniformLoadMeanIsMidpoint) {
  LoadParams l{1.0, 1.0, 2.0, 4.0};
  const auto v = sample_load_series(l, 100000, 11);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  EXPECT_NEAR(mean, 3.0, 0.03);
  EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x >= 2.0 && x <= 4.0; }));
}

TEST(Scenarios, InvalidLoadParameters) {
  EXPECT_THROW(sample_load_series({0.0, 1.0, 0.0, 1.0}, 4, 1), InvalidArgument);
  EXPECT_THROW(sample_load_series({1.0, 1.0, 2.0, 1.0}, 4, 1), InvalidArgument);
  EXPECT_EQ(sample_load_series({1.0, 1.0, 0.0, 1.0}, 6, 5), sample_load_series({1.0, 1.0, 0.0, 1.0}, 6, 5));
}

TEST(Scenarios, SingleScenarioHasUnitProbability) {
  const auto set = build_scenario_set({}, {}, 1, 24, 0);
  ASSERT_EQ(set.scenarios.size(), 1u);
  EXPECT_EQ(set.scenarios[0].probability, 1.0);
  EXPECT_EQ(set.horizon(), 24u);
}

TEST(Scenarios, UniformWeightsSumToOne) {
  for (std::size_t K : {3u, 10u, 100u}) {
    const auto set = build_scenario_set({}, {}, K, 6, 1);
    double total = 0.0;
    for (const auto& s : set.scenarios) {
      EXPECT_DOUBLE_EQ(s.probability, 1.0 / static_cast<double>(K));
      total += s.probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_TRUE(validate_scenarios(set, 6).empty());
  }
}

TEST(Scenarios, SeedsSelectDifferentButValidSets) {
  const auto a = build_scenario_set({}, {}, 100, 24, 1);
  const auto b = build_scenario_set({}, {}, 100, 24, 2);
  EXPECT_TRUE(validate_scenarios(a, 24).empty());
  EXPECT_TRUE(validate_scenarios(b, 24).empty());
  EXPECT_NE(a.scenarios[0].load, b.scenarios[0].load);
  const auto a2 = build_scenario_set({}, {}, 100, 24, 1);
  for (std::size_t h = 0; h < 100; ++h) {
    EXPECT_EQ(a.scenarios[h].wind, a2.scenarios[h].wind);
    EXPECT_EQ(a.scenarios[h].load, a2.scenarios[h].load);
  }
}

TEST(Scenarios, PrefixStableInScenarioCount) {
  const auto small = build_scenario_set({}, {}, 3, 8, 5);
  const auto large = build_scenario_set({}, {}, 7, 8, 5);
  for (std::size_t h = 0; h < 3; ++h) EXPECT_EQ(small.scenarios[h].load, large.scenarios[h].load);
}

TEST(Scenarios, ZeroCountRejected) { EXPECT_THROW(build_scenario_set({}, {}, 0, 4, 1), InvalidArgument); }

TEST(Scenarios, ValidatorFlagsBadSets) {
  ScenarioSet s;
  s.scenarios.push_back({{1.0, -1.0}, {1.0, 1.0}, 0.4});
  const auto v = validate_scenarios(s, 2);
  EXPECT_EQ(v.size(), 2u);  // negative wind and bad probability sum
}

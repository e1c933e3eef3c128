#include <gtest/gtest.h>

#include "qsuc/subqp.hpp"
#include "test_support.hpp"

using namespace qsuc;

namespace {

SucInstance one_unit(double p_min = 0.0) {
  SucInstance inst;
  inst.horizon = 1;
  inst.shed_cost = 10.0;
  inst.generators.push_back({0, 0.05, 1.0, 0.2, p_min, 2.0, 2.0, -2.0});
  return inst;
}

Scenario flat(std::size_t T, double wind, double load, double prob = 1.0) {
  return {std::vector<double>(T, wind), std::vector<double>(T, load), prob};
}

double balance_residual(const SucInstance& inst, const Scenario& s, const DispatchSolution& d) {
  double worst = 0.0;
  for (std::size_t t = 0; t < inst.horizon; ++t) {
    double supply = s.wind[t] + d.p_shed[t] - d.p_spill[t];
    for (std::size_t g = 0; g < inst.generators.size(); ++g) supply += d.p_gen[commitment_index(inst, g, t)];
    worst = std::max(worst, std::abs(supply - s.load[t]));
  }
  return worst;
}

}  // namespace

TEST(Subproblem, SmallestAssembly) {
  const auto d = build_subproblem(one_unit(), flat(1, 0.0, 1.0), Bits{1});
  EXPECT_EQ(d.num_vars(), 3u);
  EXPECT_EQ(d.num_rows(), 5u);  // copy, p_min, p_max, balance, shed >= 0
  EXPECT_FALSE(d.guarded);
}

TEST(Subproblem, RampRowsPerUnit) {
  SucInstance inst = one_unit();
  inst.horizon = 2;
  inst.generators.push_back(inst.generators[0]);
  const auto d = build_subproblem(inst, flat(2, 0.0, 1.0), Bits{1, 1, 1, 1});
  // copy 4 + p_min 4 + p_max 4 + ramp 2 + balance 2 + shed 2
  EXPECT_EQ(d.num_rows(), 18u);
  EXPECT_EQ(d.balance_row(0), 14);
}

TEST(Subproblem, DimensionChecks) {
  EXPECT_THROW(build_subproblem(one_unit(), flat(1, 0.0, 1.0), Bits{1, 0}), InvalidArgument);
  EXPECT_THROW(build_subproblem(one_unit(), flat(2, 0.0, 1.0), Bits{1}), InvalidArgument);
}

TEST(Dispatch, AllOffShedsNetLoad) {
  SucInstance inst = one_unit();
  inst.horizon = 3;
  const Scenario s{{0.2, 0.0, 0.5}, {1.0, 0.8, 0.9}, 0.25};
  const auto sol = solve_dispatch(build_subproblem(inst, s, Bits{0, 0, 0}));
  EXPECT_NEAR(sol.p_shed[0], 0.8, 1e-6);
  EXPECT_NEAR(sol.p_shed[1], 0.8, 1e-6);
  EXPECT_NEAR(sol.p_shed[2], 0.4, 1e-6);
  for (double p : sol.p_gen) EXPECT_NEAR(p, 0.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.25 * 10.0 * 2.0, 1e-5);
  EXPECT_EQ(sol.status, DispatchStatus::Optimal);
}

TEST(Dispatch, SingleUnitCoversSmallLoad) {
  const auto sol = solve_dispatch(build_subproblem(one_unit(), flat(1, 0.0, 0.7), Bits{1}));
  EXPECT_NEAR(sol.p_gen[0], 0.7, 1e-6);
  EXPECT_NEAR(sol.p_shed[0], 0.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.05 * 0.49 + 0.7, 1e-6);
}

TEST(Dispatch, ShedsBeyondCapacityWithAnalyticDual) {
  // Load 3 > p_max 2: the unit runs flat out and shedding covers the rest.
  // Raising u lifts capacity by p_max at a saving of (C_shed - marginal(p_max)).
  const auto sol = solve_dispatch(build_subproblem(one_unit(), flat(1, 0.0, 3.0), Bits{1}));
  EXPECT_NEAR(sol.p_gen[0], 2.0, 1e-6);
  EXPECT_NEAR(sol.p_shed[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.duals[0], -2.0 * (10.0 - (2 * 0.05 * 2.0 + 1.0)), 1e-5);
}

TEST(Dispatch, DeterministicResolveWithStableDuals) {
  const auto inst = testkit::load_instance("tiny");
  const auto set = testkit::load_scenarios("tiny", inst.horizon);
  const Bits u = parse_bits("110011");
  const auto a = solve_dispatch(build_subproblem(inst, set.scenarios[0], u));
  const auto b = solve_dispatch(build_subproblem(inst, set.scenarios[0], u));
  EXPECT_EQ(a.p_gen, b.p_gen);
  EXPECT_EQ(a.duals, b.duals);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Dispatch, KktAndBalanceOnEveryTinyCommitment) {
  const auto inst = testkit::load_instance("tiny");
  const auto set = testkit::load_scenarios("tiny", inst.horizon);
  for (std::uint64_t c = 0; c < 64; ++c) {
    const Bits u = testkit::index_bits(c, 6);
    for (const auto& s : set.scenarios) {
      const auto sol = solve_dispatch(build_subproblem(inst, s, u));
      EXPECT_LE(balance_residual(inst, s, sol), 1e-6);
      for (double shed : sol.p_shed) EXPECT_GE(shed, -1e-6);
      for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t) {
          const double p = sol.p_gen[g * 3 + t];
          const auto& gen = inst.generators[g];
          EXPECT_GE(p, u[g * 3 + t] * gen.p_min - 1e-6);
          EXPECT_LE(p, u[g * 3 + t] * gen.p_max + 1e-6);
        }
    }
  }
}

TEST(Dispatch, OvergenerationIsGuarded) {
  SucInstance inst = one_unit(0.5);
  inst.generators[0].ramp_up = 1.0;
  inst.generators[0].ramp_down = -1.0;
  const Scenario s = flat(1, 0.0, 0.2);
  const auto d = build_subproblem(inst, s, Bits{1});
  EXPECT_TRUE(d.guarded);
  const auto sol = solve_dispatch(d);
  EXPECT_EQ(sol.status, DispatchStatus::InfeasibleGuarded);
  EXPECT_NEAR(sol.p_spill[0], 0.3, 1e-6);
  EXPECT_LE(balance_residual(inst, s, sol), 1e-6);
}

TEST(Dispatch, ObjectiveScalesWithProbability) {
  const auto inst = testkit::load_instance("tiny");
  auto s = testkit::load_scenarios("tiny", inst.horizon).scenarios[1];
  const Bits u = parse_bits("111111");
  const double full = solve_dispatch(build_subproblem(inst, s, u), 1e-9).objective;
  s.probability *= 0.5;
  EXPECT_NEAR(solve_dispatch(build_subproblem(inst, s, u), 1e-9).objective, 0.5 * full, 1e-7);
}

TEST(Dispatch, DualsMatchFiniteDifferences) {
  std::size_t found = 0;
  for (std::uint64_t seed = 0; found < 8 && seed < 200; ++seed) {
    const auto rep = testkit::finite_difference_check(testkit::random_dispatch_case(seed));
    if (!rep.nondegenerate) continue;
    ++found;
    EXPECT_LE(rep.max_rel_err, 0.05) << "seed " << seed;
  }
  EXPECT_EQ(found, 8u);
}

TEST(Aggregate, UpperBound) {
  DispatchSolution a, b;
  a.objective = 3.0;
  b.objective = 3.0;
  const std::vector<DispatchSolution> one{a};
  EXPECT_EQ(aggregate_ub(one, 0.0), 3.0);
  const std::vector<DispatchSolution> two{a, b};
  EXPECT_EQ(aggregate_ub(two, 1.5), 7.5);
  b.status = DispatchStatus::InfeasibleGuarded;
  const std::vector<DispatchSolution> bad{a, b};
  EXPECT_THROW(aggregate_ub(bad, 0.0), InvalidArgument);
}

TEST(Aggregate, SymmetricScenariosAndZeroLoad) {
  const auto inst = testkit::load_instance("tiny");
  const Bits u = parse_bits("100100");
  const Scenario s = testkit::load_scenarios("tiny", inst.horizon).scenarios[0];
  ScenarioSet one{{s}, 0};
  one.scenarios[0].probability = 1.0;
  ScenarioSet two{{s, s}, 0};
  two.scenarios[0].probability = two.scenarios[1].probability = 0.5;
  const double cons = commitment_cost(inst, u);
  EXPECT_NEAR(aggregate_ub(solve_all_dispatch(inst, two, u), cons), aggregate_ub(solve_all_dispatch(inst, one, u), cons),
              1e-6);

  const Scenario zero = flat(3, 0.0, 0.0, 1.0);
  ScenarioSet idle{{zero}, 0};
  EXPECT_NEAR(aggregate_ub(solve_all_dispatch(inst, idle, Bits(6, 0)), 0.0), 0.0, 1e-9);
}

TEST(Qp, SolvesBoxConstrainedProblem) {
  qp::Problem p;
  p.P = Eigen::MatrixXd::Identity(2, 2);
  p.q = Eigen::Vector2d(-3.0, 1.0);
  p.A = Eigen::MatrixXd::Identity(2, 2);
  p.l = Eigen::Vector2d(0.0, 0.0);
  p.u = Eigen::Vector2d(2.0, 2.0);
  const auto sol = qp::solve(p);
  EXPECT_EQ(sol.status, qp::Status::Solved);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-8);
  EXPECT_NEAR(sol.x[1], 0.0, 1e-8);
  EXPECT_NEAR(sol.y[0], 1.0, 1e-8);   // upper bound pushes back
  EXPECT_NEAR(sol.y[1], -1.0, 1e-8);  // lower bound pushes back
}

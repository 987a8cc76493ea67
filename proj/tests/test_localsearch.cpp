#include <gtest/gtest.h>

#include "capmax/localsearch.hpp"
#include "capmax/oracle.hpp"
#include "capmax/rng.hpp"
#include "fixtures.hpp"

using namespace capmax;
using capmax::testing::central_diff;
using capmax::testing::prop3_instance;
using capmax::testing::small_instance;

TEST(Phi, Prop3Values) {
  const Instance inst = prop3_instance();
  const double one = eval_phi(inst, std::vector<std::uint8_t>{1, 0}).value;
  const double both = eval_phi(inst, std::vector<std::uint8_t>{1, 1}).value;
  EXPECT_NEAR(one, 15.0 / 16.0, 1e-12);
  EXPECT_NEAR(both, 12.0 / 13.0, 1e-12);
  EXPECT_GT(one, both);
  EXPECT_EQ(eval_phi(inst, std::vector<std::uint8_t>{0, 0}).value, 0.0);
}

TEST(Phi, CacheReturnsStoredEvaluation) {
  const Instance inst = small_instance(5, 3, 4);
  PhiCache cache;
  const std::vector<std::uint8_t> y{1, 0, 1, 0, 0};
  const PhiEval first = eval_phi(inst, y, &cache);
  const PhiEval second = eval_phi(inst, y, &cache);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache.hits(), 1);
  EXPECT_EQ(first.value, second.value);
  EXPECT_EQ(first.inner.x_star, second.inner.x_star);
}

TEST(Phi, RejectsInfeasible) {
  Instance inst = prop3_instance();
  inst.cap = 1;
  EXPECT_THROW(eval_phi(inst, std::vector<std::uint8_t>{1, 1}), Infeasible);
}

TEST(GradPhi, SlackBudgetAddsOnlyBoxTerms) {
  Instance inst = small_instance(4, 3, 6, 0.5, 1.0);
  inst.budget = 1e3;
  const std::vector<double> y{1, 1, 0, 1};
  const CostResult r = solve_cost_mrum(inst, y);
  ASSERT_EQ(r.multipliers.kkt_case, KktCase::kBudgetSlack);
  const std::vector<double> g = grad_phi(inst, y);
  for (int i = 0; i < 4; ++i) {
    double plain = 0.0;
    for (int n = 0; n < inst.zones; ++n) {
      const double d = mrum_denominator(inst, y, r.x_star, n);
      plain += inst.q[n] * inst.u_comp[n] * (inst.a_at(n, i) * r.x_star[i] + inst.b_at(n, i)) / (d * d);
    }
    // Every open site sits at its upper bound here, so gamma_u carries the
    // remaining marginal value.
    const double extra = r.multipliers.gamma_u[i] * inst.upper[i] - r.multipliers.gamma_l[i] * inst.lower[i];
    EXPECT_NEAR(g[i], plain + extra, 1e-12 * (1.0 + std::abs(g[i])));
  }
}

TEST(GradPhi, CostInsensitiveZonesReduceToPlainDerivative) {
  Instance inst = small_instance(4, 3, 6, 0.5, 1.0);
  std::fill(inst.a.begin(), inst.a.end(), 0.0);
  const std::vector<double> y{1, 0, 1, 1};
  const CostResult r = solve_cost_mrum(inst, y);
  const std::vector<double> g = grad_phi(inst, y);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(r.multipliers.gamma_u[i], 0.0);
    EXPECT_EQ(r.multipliers.gamma_l[i], 0.0);
    double plain = 0.0;
    for (int n = 0; n < inst.zones; ++n) {
      const double d = mrum_denominator(inst, y, r.x_star, n);
      plain += inst.q[n] * inst.u_comp[n] * inst.b_at(n, i) / (d * d);
    }
    EXPECT_NEAR(g[i], plain, 1e-12 * plain);
  }
}

TEST(GradPhi, MatchesFiniteDifferencesOnContinuousExtension) {
  SplitMix64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = small_instance(5, 3, 700 + trial, 0.7, 1.0);
    std::vector<double> y(5);
    for (auto& v : y) v = rng.uniform(0.3, 1.0);
    const CostResult r = solve_cost_mrum(inst, y);
    if (r.multipliers.kkt_case == KktCase::kPerturbed) continue;
    const std::vector<double> g = grad_phi(inst, y);
    for (int i = 0; i < 5; ++i) {
      const double fd = central_diff(
          [&](double h) {
            auto w = y;
            w[i] += h;
            return solve_cost_mrum(inst, w).value;
          },
          1e-5);
      EXPECT_LE(std::abs(g[i] - fd), 1e-3 * std::max(std::abs(fd), 1.0)) << "trial " << trial << " site " << i;
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(GradPhi, Prop3PerturbedPathIsFinite) {
  const Instance inst = prop3_instance();
  const std::vector<double> y{1, 1};
  ASSERT_EQ(solve_cost_mrum(inst, y).multipliers.kkt_case, KktCase::kPerturbed);
  for (double g : grad_phi(inst, y)) EXPECT_TRUE(std::isfinite(g));
}

TEST(LocalSearch, Prop3FindsOptimum) {
  const LocalSearchResult r = local_search(prop3_instance());
  EXPECT_EQ(r.joint.solution.y, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_NEAR(r.joint.value, 15.0 / 16.0, 1e-12);
  EXPECT_EQ(r.joint.status, JointStatus::kLocalOptimum);
}

TEST(LocalSearch, DominantSiteFoundByGreedy) {
  Instance inst = small_instance(5, 4, 12, 0.5, 0.2);
  ASSERT_EQ(inst.cap, 1);
  for (int n = 0; n < inst.zones; ++n) inst.a[n * inst.m + 3] = 50.0;
  const LocalSearchResult r = local_search(inst);
  EXPECT_EQ(r.greedy.y, (std::vector<std::uint8_t>{0, 0, 0, 1, 0}));
  EXPECT_EQ(r.joint.solution.y, r.greedy.y);
}

TEST(LocalSearch, SandwichedBetweenGreedyAndOracle) {
  for (int k = 0; k < 20; ++k) {
    const Instance inst = small_instance(4 + k % 5, 1 + k % 4, 1000 + k);
    const LocalSearchResult r = local_search(inst);
    const double best = brute_force_joint(inst).value;
    EXPECT_GE(r.joint.value, r.greedy.value);
    EXPECT_LE(r.joint.value, best + 1e-9);
    EXPECT_TRUE(check_feasible(inst, r.joint.solution).empty());
    EXPECT_NEAR(r.joint.value, eval_objective(inst, r.joint.solution, Framework::kMrum), 1e-10);
  }
}

TEST(LocalSearch, Deterministic) {
  const Instance inst = small_instance(10, 6, 77);
  const LocalSearchResult a = local_search(inst);
  const LocalSearchResult b = local_search(inst);
  EXPECT_EQ(a.joint.solution.y, b.joint.solution.y);
  EXPECT_EQ(a.joint.solution.x, b.joint.solution.x);
  EXPECT_EQ(a.joint.value, b.joint.value);
  EXPECT_EQ(a.phi_evaluations, b.phi_evaluations);
}

TEST(LocalSearch, ZeroTimeLimitKeepsStartingPoint) {
  LocalSearchParams p;
  p.time_limit = 0.0;
  const LocalSearchResult r = local_search(small_instance(6, 3, 2), p);
  EXPECT_EQ(r.joint.status, JointStatus::kLimit);
  EXPECT_EQ(r.joint.value, 0.0);
}

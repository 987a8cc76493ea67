#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "capmax/milp.hpp"
#include "capmax/rng.hpp"
#include "lp_oracles.hpp"

using namespace capmax;

TEST(SolveLp, TinyMaximization) {
  LpModel lp;
  lp.add_variable(0, 1, 1.0);
  lp.add_variable(0, 1, 1.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kLessEqual, 1.0);
  auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.value, 1.0, 1e-12);
}

TEST(SolveLp, ContradictoryRowsInfeasible) {
  LpModel lp;
  lp.add_variable(-kInf, kInf, 1.0);
  lp.add_row({{0, 1.0}}, RowSense::kGreaterEqual, 2.0);
  lp.add_row({{0, 1.0}}, RowSense::kLessEqual, 1.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kInfeasible);
}

TEST(SolveLp, Unbounded) {
  LpModel lp;
  lp.add_variable(0, kInf, 1.0);
  lp.add_variable(0, 1, 0.0);
  lp.add_row({{0, 1.0}, {1, -1.0}}, RowSense::kGreaterEqual, 0.0);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::kUnbounded);
}

TEST(SolveLp, MinimizationWithEqualityAndFreeVariable) {
  // min x0 + 2 x1 s.t. x0 + x1 = 3, x0 - x1 >= -1, x0 free, x1 in [0,5]
  LpModel lp;
  lp.sense = ObjSense::kMinimize;
  lp.add_variable(-kInf, kInf, 1.0);
  lp.add_variable(0, 5, 2.0);
  lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kEqual, 3.0);
  lp.add_row({{0, 1.0}, {1, -1.0}}, RowSense::kGreaterEqual, -1.0);
  auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.point[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.point[1], 0.0, 1e-12);
  EXPECT_NEAR(sol.value, 3.0, 1e-12);
  EXPECT_NEAR(sol.duals[0], 1.0, 1e-12);
}

TEST(SolveLp, BealeCyclingExample) {
  // Cycles under the textbook largest-coefficient rule without safeguards.
  LpModel lp;
  lp.sense = ObjSense::kMinimize;
  for (double c : {-0.75, 20.0, -0.5, 6.0}) lp.add_variable(0, kInf, c);
  lp.add_row({{0, 0.25}, {1, -8.0}, {2, -1.0}, {3, 9.0}}, RowSense::kLessEqual, 0.0);
  lp.add_row({{0, 0.5}, {1, -12.0}, {2, -0.5}, {3, 3.0}}, RowSense::kLessEqual, 0.0);
  lp.add_row({{2, 1.0}}, RowSense::kLessEqual, 1.0);
  auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.value, -1.25, 1e-12);
}

TEST(SolveLp, RejectsInvalidModels) {
  LpModel lp;
  lp.add_variable(1.0, 0.0);
  EXPECT_THROW(solve_lp(lp), std::invalid_argument);
  LpModel bad_row;
  bad_row.add_variable(0, 1);
  bad_row.add_row({{3, 1.0}}, RowSense::kLessEqual, 1.0);
  EXPECT_THROW(solve_lp(bad_row), std::invalid_argument);
  LpModel nan_rhs;
  nan_rhs.add_variable(0, 1);
  nan_rhs.add_row({{0, 1.0}}, RowSense::kLessEqual, std::nan(""));
  EXPECT_THROW(solve_lp(nan_rhs), std::invalid_argument);
}

TEST(SolveLp, StallCapRaisesDiagnostic) {
  SplitMix64 rng(5);
  LpModel lp = capmax::testing::random_lp(rng, 5, 5);
  LpOptions opt;
  opt.max_iters = 1;
  try {
    solve_lp(lp, opt);
    SUCCEED();  // solved in at most one pivot
  } catch (const LpStallError& e) {
    EXPECT_NE(std::string(e.what()).find("basis"), std::string::npos);
  }
}

TEST(SolveLp, MatchesVertexEnumeration) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const LpModel lp = capmax::testing::random_lp(rng, 5, 5);
    const auto oracle = capmax::testing::vertex_enumeration(lp);
    const auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << "trial " << trial;
    ASSERT_TRUE(oracle.has_value());
    EXPECT_NEAR(sol.value, *oracle, 1e-7) << "trial " << trial;
  }
}

TEST(SolveLp, OptimalityCertificates) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const LpModel lp = capmax::testing::random_lp(rng, 3 + trial % 6, 3 + (trial / 6) % 6);
    const auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::kOptimal);
    const auto cert = capmax::testing::certificate_residuals(lp, sol);
    EXPECT_LE(cert.primal, 1e-8) << "trial " << trial;
    EXPECT_LE(cert.dual_sign, 1e-8) << "trial " << trial;
    EXPECT_LE(cert.slackness, 1e-8) << "trial " << trial;
    EXPECT_LE(cert.stationarity, 1e-8) << "trial " << trial;
  }
}

TEST(SolveLp, TerminatesOnDegenerateSuite) {
  // Small integer data with many zero right-hand sides produces heavy
  // degeneracy.
  SplitMix64 rng(99);
  int optimal = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    LpModel lp;
    lp.sense = trial % 2 ? ObjSense::kMaximize : ObjSense::kMinimize;
    const int n = 2 + static_cast<int>(rng.next() % 4);
    const int r = 2 + static_cast<int>(rng.next() % 4);
    for (int j = 0; j < n; ++j) lp.add_variable(0.0, rng.uniform01() < 0.7 ? 1.0 : kInf, std::floor(rng.uniform(-3, 4)));
    for (int i = 0; i < r; ++i) {
      std::vector<LinearTerm> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, std::floor(rng.uniform(-2, 3))});
      const double rhs = rng.uniform01() < 0.6 ? 0.0 : std::floor(rng.uniform(0, 3));
      lp.add_row(terms, rng.uniform01() < 0.8 ? RowSense::kLessEqual : RowSense::kGreaterEqual, rhs);
    }
    LpSolution sol;
    ASSERT_NO_THROW(sol = solve_lp(lp)) << "trial " << trial;
    if (sol.status == LpStatus::kOptimal) {
      ++optimal;
      EXPECT_LE(capmax::testing::certificate_residuals(lp, sol).primal, 1e-9);
    }
  }
  EXPECT_GT(optimal, 1000);
}

TEST(SolveMilp, KnapsacksMatchEnumeration) {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    std::vector<double> w(n), v(n);
    for (int j = 0; j < n; ++j) {
      w[j] = std::floor(rng.uniform(1, 11));
      v[j] = std::floor(rng.uniform(1, 11));
    }
    double total = 0.0;
    for (double x : w) total += x;
    const double cap = std::floor(0.4 * total);
    MilpModel milp;
    std::vector<LinearTerm> row;
    for (int j = 0; j < n; ++j) row.push_back({milp.add_binary(v[j]), w[j]});
    milp.lp.add_row(row, RowSense::kLessEqual, cap);
    const auto sol = solve_milp(milp);
    ASSERT_EQ(sol.status, MilpStatus::kOptimal);
    EXPECT_EQ(sol.value, capmax::testing::knapsack_enumeration(w, v, cap)) << "trial " << trial;
    double used = 0.0;
    for (int j = 0; j < n; ++j) {
      EXPECT_TRUE(sol.point[j] == 0.0 || sol.point[j] == 1.0);
      used += w[j] * sol.point[j];
    }
    EXPECT_LE(used, cap);
    EXPECT_GE(sol.bound, sol.value);
    for (std::size_t k = 1; k < sol.bound_history.size(); ++k)
      EXPECT_LE(sol.bound_history[k], sol.bound_history[k - 1] + 1e-12);
  }
}

TEST(SolveMilp, IntegralRelaxationUsesOneNode) {
  MilpModel milp;
  milp.add_binary(1.0);
  milp.add_binary(2.0);
  milp.lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kLessEqual, 1.0);
  const auto sol = solve_milp(milp);
  ASSERT_EQ(sol.status, MilpStatus::kOptimal);
  EXPECT_EQ(sol.node_count, 1);
  EXPECT_EQ(sol.value, 2.0);
}

TEST(SolveMilp, IntegerInfeasibleWithFeasibleRelaxation) {
  MilpModel milp;
  milp.add_binary(1.0);
  milp.add_binary(1.0);
  milp.lp.add_row({{0, 1.0}, {1, 1.0}}, RowSense::kEqual, 1.5);
  EXPECT_EQ(solve_lp(milp.lp).status, LpStatus::kOptimal);
  EXPECT_EQ(solve_milp(milp).status, MilpStatus::kInfeasible);
}

TEST(SolveMilp, MinimizationAndContinuousColumns) {
  // min 3 y0 + 2 y1 + x s.t. x + 4 y0 + 3 y1 >= 5, x in [0, 2]
  MilpModel milp;
  milp.lp.sense = ObjSense::kMinimize;
  milp.add_binary(3.0);
  milp.add_binary(2.0);
  const int x = milp.lp.add_variable(0.0, 2.0, 1.0);
  milp.lp.add_row({{0, 4.0}, {1, 3.0}, {x, 1.0}}, RowSense::kGreaterEqual, 5.0);
  const auto sol = solve_milp(milp);
  ASSERT_EQ(sol.status, MilpStatus::kOptimal);
  // candidates: y=(1,0),x=1 -> 4; y=(0,1),x=2 -> 4; y=(1,1),x=0 -> 5
  EXPECT_NEAR(sol.value, 4.0, 1e-9);
  EXPECT_LE(sol.bound, sol.value + 1e-9);
  for (std::size_t k = 1; k < sol.bound_history.size(); ++k)
    EXPECT_GE(sol.bound_history[k], sol.bound_history[k - 1] - 1e-12);
}

TEST(SolveMilp, NodeLimitReportsIncumbentAndBound) {
  SplitMix64 rng(8);
  MilpModel milp;
  std::vector<LinearTerm> row;
  for (int j = 0; j < 14; ++j) row.push_back({milp.add_binary(rng.uniform(1, 10)), rng.uniform(1, 10)});
  milp.lp.add_row(row, RowSense::kLessEqual, 20.0);
  MilpOptions opt;
  opt.max_nodes = 2;
  const auto sol = solve_milp(milp, opt);
  EXPECT_TRUE(sol.status == MilpStatus::kLimit || sol.status == MilpStatus::kOptimal);
  if (!sol.point.empty()) EXPECT_GE(sol.bound, sol.value - 1e-9);
}

// Multicut outer approximation for the joint problem.
//
// With z_i = y_i x_i the captured demand of a zone group D_l is
//   phi_l(y, z) = sum_{n in D_l} q_n (1 - u_n / d_n),
//   d_n = u_n + sum_i (a_ni z_i + b_ni y_i),
// which is concave in (y, z). The master MILP maximizes sum_l theta_l over
// the linear feasible set (McCormick envelopes for z) with theta_l bounded
// by first-order cuts of phi_l collected so far.

#pragma once

#include <span>
#include <vector>

#include "capmax/joint.hpp"
#include "capmax/milp.hpp"
#include "capmax/model.hpp"

namespace capmax {

// min(T, zones) contiguous blocks whose sizes differ by at most one.
std::vector<std::vector<int>> partition_zones(int zones, int groups);

struct GroupEval {
  double value = 0.0;
  std::vector<double> grad_y;  // [m]
  std::vector<double> grad_z;  // [m]
};

// Throws InvalidInput if some zone of the group has d_n <= 0.
GroupEval group_value_and_gradient(const Instance& instance, std::span<const int> group,
                                   std::span<const double> y, std::span<const double> z);

// theta_l <= intercept + grad_y . y + grad_z . z, tangent to phi_l at the anchor.
struct Cut {
  int group = 0;
  std::vector<double> anchor_y;
  std::vector<double> anchor_z;
  std::vector<double> grad_y;
  std::vector<double> grad_z;
  double intercept = 0.0;

  double evaluate(std::span<const double> y, std::span<const double> z) const;
};

struct MoaConfig {
  int groups = 5;          // T
  double tau = -1.0;       // stopping threshold; negative selects 1e-6 (1 + sum q)
  double time_limit = kInf;
  int max_iters = 1000;
  double master_tol = 1e-8;
};

struct MoaState {
  std::vector<std::vector<int>> groups;
  std::vector<Cut> cuts;
  double tau = 0.0;
};

// Status kOptimal when sum theta* <= sum phi(y*, z*) + tau or the master
// bound is within tau of the incumbent; kLimit on time or iteration limits.
// Throws std::logic_error if the master turns infeasible.
JointResult solve_moa(const Instance& instance, const MoaConfig& config, MoaState* state = nullptr);

}  // namespace capmax

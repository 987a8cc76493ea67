// Exhaustive reference solvers for small instances.

#pragma once

#include <span>

#include "capmax/joint.hpp"
#include "capmax/model.hpp"

namespace capmax {

inline constexpr int kBruteForceMaxM = 20;
inline constexpr int kGridMaxOpen = 4;

struct GridResult {
  double value = 0.0;
  std::vector<double> x;     // best grid point
  double lipschitz = 0.0;    // max_i sup |df/dx_i| over the box
  double error_bound = 0.0;  // optimum - value <= error_bound
  long points = 0;
};

// Sweeps all but the last open coordinate over {L, L + step, ..., U} (U
// always included); the last coordinate takes the largest feasible value,
// which is optimal for it because the objective is nondecreasing in every
// cost. Throws InvalidInput for more than kGridMaxOpen open sites or
// step <= 0, Infeasible for an infeasible open set.
GridResult grid_cost_oracle(const Instance& instance, std::span<const std::uint8_t> y, double step);

struct BruteForceOptions {
  // When positive, every subset with at most kGridMaxOpen open sites is
  // also solved on a grid of this step and a std::logic_error is raised if
  // the gradient solver falls short of the grid by more than its error
  // bound.
  double cross_check_step = 0.0;
};

// Enumerates every open set with at most K sites whose lower bounds fit the
// budget. Ties keep the lexicographically smallest mask. Throws InvalidInput
// when m > kBruteForceMaxM.
JointResult brute_force_joint(const Instance& instance, const BruteForceOptions& options = {});

}  // namespace capmax

// Result type shared by the joint location-and-cost solvers.

#pragma once

#include <string>
#include <vector>

#include "capmax/model.hpp"

namespace capmax {

enum class JointStatus { kOptimal, kLimit, kLocalOptimum };
const char* to_string(JointStatus status);

struct IterationRecord {
  int iter = 0;
  double bound = 0.0;      // best known upper bound on the optimum
  double incumbent = 0.0;  // best feasible objective so far
  double gap = 0.0;        // bound - incumbent
  double seconds = 0.0;
};

struct JointResult {
  std::string method;
  JointStatus status = JointStatus::kOptimal;
  Solution solution;
  double value = 0.0;         // multiplicative-framework objective at solution
  double bound = 0.0;         // upper bound on the optimum; +inf when unknown
  long evaluations = 0;       // cost-problem solves (ls, oracle) or master solves (moa)
  double seconds = 0.0;
  std::vector<IterationRecord> log;
};

// CSV with header "iter,bound,incumbent,gap,seconds". Timing columns are
// written as 0 when zero_times is set so runs can be compared byte for byte.
std::string iteration_log_csv(const std::vector<IterationRecord>& log, bool zero_times = false);

nlohmann::json joint_result_to_json(const JointResult& result, bool zero_times = false);

}  // namespace capmax

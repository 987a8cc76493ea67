// Linear and mixed 0/1 programming.
//
// solve_lp is a dense bounded-variable primal simplex (two phases, Dantzig
// pricing with a Bland fallback on degenerate stalls). solve_milp wraps it
// in best-bound branch and bound on the binary variables. Both target the
// small master problems of the outer-approximation solver, not general LP
// workloads.

#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace capmax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjSense { kMinimize, kMaximize };
enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

struct LpRow {
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

struct LpModel {
  ObjSense sense = ObjSense::kMaximize;
  std::vector<double> objective;  // one coefficient per variable
  double objective_constant = 0.0;
  std::vector<double> lower;      // may be -kInf
  std::vector<double> upper;      // may be +kInf
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int add_variable(double lb, double ub, double obj = 0.0);
  int add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs);
  // Throws std::invalid_argument on out-of-range indices, non-finite data or
  // lb > ub.
  void validate() const;
};

struct MilpModel {
  LpModel lp;
  std::vector<int> binaries;

  int add_binary(double obj = 0.0);
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };
const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> point;
  double value = 0.0;
  std::vector<double> duals;         // one per row, d value / d rhs
  std::vector<double> reduced_costs; // one per variable, in the model's sense
  int iterations = 0;
};

struct LpOptions {
  double tol = 1e-8;
  int max_iters = 0;  // 0: 50 * (rows + cols) + 1000
};

// Raised when the simplex exceeds its iteration cap; what() describes the
// basis at the time of the stall.
class LpStallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LpSolution solve_lp(const LpModel& model, const LpOptions& options = {});

enum class MilpStatus { kOptimal, kInfeasible, kUnbounded, kLimit };
const char* to_string(MilpStatus status);

struct MilpOptions {
  double tol = 1e-8;             // relative optimality gap for pruning
  double integrality_tol = 1e-6;
  double time_limit = kInf;      // seconds
  long max_nodes = 0;            // 0: unlimited
};

struct MilpSolution {
  MilpStatus status = MilpStatus::kInfeasible;
  std::vector<double> point;  // binaries rounded to 0/1
  double value = 0.0;         // incumbent objective
  double bound = 0.0;         // best bound (>= value when maximizing)
  long node_count = 0;
  std::vector<double> bound_history;  // global bound after each processed node
};

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options = {});

}  // namespace capmax

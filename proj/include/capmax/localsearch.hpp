// Local search on the location vector for the multiplicative framework.
//
// Phi(y) is the best captured demand for a fixed open set, found by the
// exact cost solver. Its gradient on the continuous extension
// y in [0,1]^m (bounds y_i L_i <= x_i <= y_i U_i) follows from the envelope
// theorem applied to the Lagrangian of the cost problem:
//   dPhi/dy_i = df/dy_i (y, x*) + gU_i U_i - gL_i L_i.

#pragma once

#include <map>
#include <span>
#include <vector>

#include "capmax/costopt.hpp"
#include "capmax/joint.hpp"
#include "capmax/milp.hpp"

namespace capmax {

struct PhiEval {
  std::vector<std::uint8_t> y;
  double value = 0.0;
  CostResult inner;
};

// Keyed by the open-set bitmask.
class PhiCache {
 public:
  const PhiEval* find(std::span<const std::uint8_t> y) const;
  const PhiEval& insert(PhiEval eval);
  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }
  long hits() const { return hits_; }

 private:
  std::map<std::vector<std::uint8_t>, PhiEval> entries_;
  mutable long hits_ = 0;
};

// Throws Infeasible when y breaks the cardinality cap or the budget.
PhiEval eval_phi(const Instance& instance, std::span<const std::uint8_t> y, PhiCache* cache = nullptr);

// y may be fractional. Propagates KktError from multiplier inference.
std::vector<double> grad_phi(const Instance& instance, std::span<const double> y);

struct LocalSearchParams {
  int max_iters = 1000;  // rounds of the gradient and exchange steps
  double time_limit = kInf;
  int top_k = 5;         // flips tried per gradient step
};

struct LocalSearchResult {
  JointResult joint;       // status kLocalOptimum or kLimit
  PhiEval greedy;          // outcome of the greedy step
  long phi_evaluations = 0;
  long cache_hits = 0;
};

LocalSearchResult local_search(const Instance& instance, const LocalSearchParams& params = {});

}  // namespace capmax

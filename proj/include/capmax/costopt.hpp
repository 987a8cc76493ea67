// Cost optimization for a fixed set of open facilities.
//
// Under the multiplicative framework the captured demand is concave in the
// costs, so projected gradient ascent over
//   X(y) = { x : sum_i x_i <= C, y_i L_i <= x_i <= y_i U_i }
// reaches the global optimum. The additive framework is not unimodal; only a
// multi-start landscape probe is offered for it.
//
// Every function here accepts a real-valued y in [0,1]^m (the continuous
// extension); binary vectors are the common case.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "capmax/model.hpp"

namespace capmax {

// Euclidean projection onto { sum x <= budget, active_i L_i <= x_i <= active_i U_i }.
// Throws Infeasible when the set is empty.
std::vector<double> project_knapsack_box(std::span<const double> point, double budget,
                                         std::span<const double> lower, std::span<const double> upper,
                                         std::span<const double> active);

enum class KktCase {
  kBudgetSlack,     // sum x < C, lambda = 0
  kInteriorAnchor,  // sum x = C with a coordinate strictly inside its box
  kPerturbed,       // sum x = C, every coordinate at a bound; resolved via C + eps
  kDegenerate,      // objective constant in x
};

const char* to_string(KktCase c);

struct KktMultipliers {
  double lambda = 0.0;          // budget row
  std::vector<double> gamma_u;  // x_i <= y_i U_i
  std::vector<double> gamma_l;  // x_i >= y_i L_i
  KktCase kkt_case = KktCase::kBudgetSlack;
  double budget_perturbation = 0.0;  // eps used in the kPerturbed case
  double lambda_perturbed = 0.0;     // multiplier of the C + eps problem
};

struct CostOptions {
  double tol = 1e-8;           // projected-gradient norm
  int max_iters = 100000;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  double perturb_scale = 1e-4;  // eps = perturb_scale * (1 + C)
  double kkt_tol = 1e-6;        // stationarity residual accepted by infer_multipliers
};

struct CostResult {
  std::vector<double> x_star;
  double value = 0.0;
  KktMultipliers multipliers;
  int iterations = 0;
  bool converged = false;
  double pg_norm = 0.0;
};

// Raised when multipliers cannot be made stationary, i.e. the supplied point
// is not (near) optimal.
class KktError : public std::runtime_error {
 public:
  KktError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Throws Infeasible naming the violated row when sum y > K or sum y L > C.
CostResult solve_cost_mrum(const Instance& instance, std::span<const double> y, const CostOptions& options = {});

KktMultipliers infer_multipliers(const Instance& instance, std::span<const double> y,
                                 std::span<const double> x_star, const CostOptions& options = {});

struct KktResiduals {
  double stationarity = 0.0;  // max_i |df/dx_i - lambda - gU_i + gL_i|
  double slackness = 0.0;     // max of |lambda (sum x - C)|, |gU_i (x_i - y_i U_i)|, |gL_i (x_i - y_i L_i)|
  double sign = 0.0;          // most negative multiplier, as a positive number
};

KktResiduals kkt_residuals(const Instance& instance, std::span<const double> y, std::span<const double> x,
                           const KktMultipliers& multipliers);

struct LocalMaximum {
  std::vector<double> x;
  double value = 0.0;
  int hits = 0;  // starts that converged here
};

// Projected gradient ascent on the additive-framework objective from every
// start; converged points closer than cluster_radius are merged. Sorted by
// decreasing value.
std::vector<LocalMaximum> probe_arum_landscape(const Instance& instance, std::span<const double> y,
                                               const std::vector<std::vector<double>>& starts,
                                               double cluster_radius = 1e-4);

}  // namespace capmax

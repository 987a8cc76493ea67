// Problem data, choice probabilities and objective evaluation for the
// maximum-capture problem with joint location and cost decisions.
//
// Utilities are affine in the cost spent on a facility: V_ni = a_ni x_i + b_ni.
// Under the additive framework a zone's choice weights are exp(V_ni); under
// the multiplicative framework they are V_ni itself. The competitor's
// weight is u_comp[n] in both cases.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace capmax {

enum class Framework { kArum, kMrum };

std::string to_string(Framework framework);
Framework framework_from_string(const std::string& name);

// Malformed input: dimension mismatches, non-finite numbers, violated data
// invariants.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input that admits no feasible point, or a point that violates
// the problem constraints.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Instance {
  int m = 0;      // candidate locations
  int zones = 0;  // customer zones |I|
  std::vector<double> q;       // [zones] customers per zone
  std::vector<double> a;       // [zones * m] row-major cost sensitivity
  std::vector<double> b;       // [zones * m] row-major utility offset
  std::vector<double> u_comp;  // [zones] competitor utility
  double budget = 0.0;         // C
  int cap = 0;                 // K, maximum number of open facilities
  std::vector<double> lower;   // [m] L_i
  std::vector<double> upper;   // [m] U_i

  double a_at(int zone, int loc) const { return a[static_cast<std::size_t>(zone) * m + loc]; }
  double b_at(int zone, int loc) const { return b[static_cast<std::size_t>(zone) * m + loc]; }
  double total_demand() const;

  // Throws InvalidInput on the first violated data invariant. ARUM-only
  // instances may carry negative offsets when allow_negative_b is set.
  void validate(bool allow_negative_b = false) const;
};

struct Solution {
  std::vector<std::uint8_t> y;  // [m] 0/1 open flags
  std::vector<double> x;        // [m] cost spent per location

  static Solution closed(int m) { return {std::vector<std::uint8_t>(m, 0), std::vector<double>(m, 0.0)}; }
  int open_count() const;
  std::vector<double> y_real() const { return {y.begin(), y.end()}; }
};

struct Violation {
  std::string constraint;  // "budget", "cardinality", "upper", "lower", "closed-cost", "binary", "nonnegative"
  int index = -1;          // location index, -1 for aggregate rows
  double amount = 0.0;     // how far the constraint is violated
  std::string message;
};

inline constexpr double kFeasibilityTol = 1e-9;

// Empty iff every constraint of the joint problem holds within tol.
// Throws InvalidInput on dimension mismatch.
std::vector<Violation> check_feasible(const Instance& instance, const Solution& solution,
                                      double tol = kFeasibilityTol);

// Probabilities of each location (entries 0..m-1) and of the competitor
// (entry m) for one zone. Throws Infeasible if the solution is infeasible.
std::vector<double> choice_probs(const Instance& instance, const Solution& solution,
                                 Framework framework, int zone);

// Expected captured demand sum_n q_n (1 - P_n(competitor)).
double eval_objective(const Instance& instance, const Solution& solution, Framework framework);

// --- Unchecked kernels ------------------------------------------------------
// These evaluate the objective on the continuous extension y in [0,1]^m
// without feasibility checks; solvers call them in their inner loops.

// d_n = u_comp_n + sum_i y_i (a_ni x_i + b_ni)
double mrum_denominator(const Instance& instance, std::span<const double> y,
                        std::span<const double> x, int zone);

// sum_n q_n - sum_n q_n u_comp_n / d_n
double mrum_value(const Instance& instance, std::span<const double> y, std::span<const double> x);

// d f / d x_i = y_i sum_n q_n u_n a_ni / d_n^2 and
// d f / d y_i = sum_n q_n u_n (a_ni x_i + b_ni) / d_n^2. Either output may be
// empty to skip it.
void mrum_gradients(const Instance& instance, std::span<const double> y, std::span<const double> x,
                    std::span<double> grad_x, std::span<double> grad_y);

double arum_value(const Instance& instance, std::span<const double> y, std::span<const double> x);
void arum_gradient_x(const Instance& instance, std::span<const double> y, std::span<const double> x,
                     std::span<double> grad_x);

// --- Instance files ---------------------------------------------------------

nlohmann::json instance_to_json(const Instance& instance);
// Rejects missing fields, non-numeric or non-finite entries and dimension
// mismatches with InvalidInput. Unknown keys are ignored.
Instance instance_from_json(const nlohmann::json& doc, bool allow_negative_b = false);
Instance read_instance_file(const std::string& path, bool allow_negative_b = false);
void write_instance_file(const std::string& path, const Instance& instance,
                         const nlohmann::json& extra = nlohmann::json::object());

// Stable 64-bit FNV-1a digest of the canonical instance JSON, as hex.
std::string instance_hash(const Instance& instance);

}  // namespace capmax

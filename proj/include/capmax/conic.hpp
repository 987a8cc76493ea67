// Conic quadratic reformulations of the multiplicative-framework problem.
//
// With w_n the zone denominator and theta_n >= 1 / w_n, the captured demand
// is sum_n q_n - sum_n q_n u_n theta_n, so maximizing it is the same as
// minimizing sum_n q_n u_n theta_n subject to rotated cones theta_n w_n >= 1.
// Models are stored in that minimization form; their objective at a feasible
// point equals total demand minus captured demand.
//
// CP: cost problem for a fixed open set S. Variables x_i (i in S), w, theta.
// FC: joint problem. Variables x, z, w, theta (continuous) and y (binary),
//     with z_i = y_i x_i replaced by McCormick envelopes.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "capmax/milp.hpp"
#include "capmax/model.hpp"

namespace capmax {

struct ConicVar {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  bool binary = false;
};

struct ConicRow {
  std::string name;
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::kEqual;
  double rhs = 0.0;
};

// var[a] * var[b] >= var[c]^2 with var[a], var[b] >= 0. c == kConeOne stands
// for the constant 1.
inline constexpr int kConeOne = -1;

struct RotatedCone {
  int a = 0;
  int b = 0;
  int c = kConeOne;
};

struct ConicModel {
  std::string kind;  // "cp" or "fc"
  ObjSense sense = ObjSense::kMinimize;
  std::vector<LinearTerm> objective;
  double objective_constant = 0.0;
  std::vector<ConicVar> vars;
  std::vector<ConicRow> rows;
  std::vector<RotatedCone> cones;

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_continuous() const;
  int num_binary() const;
  // Linear rows plus cones; variable bounds are not counted.
  int num_constraints() const { return static_cast<int>(rows.size() + cones.size()); }
  // Index of the named variable, -1 if absent.
  int find(const std::string& name) const;
  // Throws InvalidInput on out-of-range indices or malformed bounds.
  void validate() const;
};

// Throws Infeasible if the open set breaks the cardinality cap or the lower
// bounds of its sites exceed the budget.
ConicModel build_cp_conic(const Instance& instance, std::span<const std::uint8_t> open_set);
ConicModel build_fc_conic(const Instance& instance);

// Assignments built from a feasible (y, x): theta_n = 1 / d_n, w_n = d_n,
// z_i = y_i x_i.
std::vector<double> cp_point(const Instance& instance, std::span<const std::uint8_t> open_set,
                             std::span<const double> x);
std::vector<double> fc_point(const Instance& instance, const Solution& solution);

struct CheckReport {
  double max_linear_residual = 0.0;
  double max_bound_violation = 0.0;
  double max_integrality_violation = 0.0;
  double max_cone_violation = 0.0;  // max over cones of max(c^2 - a b, -a, -b, 0)
  double max_cone_gap = 0.0;        // max over cones of |a b - c^2|
  double objective = 0.0;
  bool feasible = false;  // every violation <= tol
};

inline constexpr double kConicTol = 1e-8;

// Throws InvalidInput if the assignment length differs from the variable
// count.
CheckReport check_point(const ConicModel& model, std::span<const double> assignment, double tol = kConicTol);

// Serialization, format tag "capmax-conic/1"; see docs/conic-format.md.
nlohmann::json conic_to_json(const ConicModel& model);
ConicModel conic_from_json(const nlohmann::json& doc);
std::string export_conic(const ConicModel& model);  // pretty-printed, trailing newline

}  // namespace capmax

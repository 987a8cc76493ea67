// Independent reference computations for the LP/MILP engine: vertex
// enumeration, optimality certificates and exhaustive 0/1 knapsack.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "capmax/milp.hpp"
#include "capmax/rng.hpp"

namespace capmax::testing {

// Random bounded LP with a known interior-ish feasible point, so the
// optimum always exists. Mixes all three row senses.
inline LpModel random_lp(SplitMix64& rng, int rows, int cols) {
  LpModel lp;
  lp.sense = rng.uniform01() < 0.5 ? ObjSense::kMaximize : ObjSense::kMinimize;
  std::vector<double> x0(cols);
  for (int j = 0; j < cols; ++j) {
    const double lb = rng.uniform01() < 0.2 ? -5.0 : 0.0;
    lp.add_variable(lb, 10.0, rng.uniform(-1, 1));
    x0[j] = rng.uniform(lb, 10.0);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<LinearTerm> terms;
    double act = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double c = rng.uniform(-1, 1);
      terms.push_back({j, c});
      act += c * x0[j];
    }
    const double u = rng.uniform01();
    if (u < 0.15) {
      lp.add_row(terms, RowSense::kEqual, act);
    } else if (u < 0.55) {
      lp.add_row(terms, RowSense::kGreaterEqual, act - rng.uniform(0, 2));
    } else {
      lp.add_row(terms, RowSense::kLessEqual, act + rng.uniform(0, 2));
    }
  }
  return lp;
}

// Best objective over all basic feasible solutions. Requires finite bounds.
inline std::optional<double> vertex_enumeration(const LpModel& lp, double tol = 1e-9) {
  const int n = lp.num_vars();
  const int r = static_cast<int>(lp.rows.size());
  // Candidate active constraints: each row as an equality, then each bound.
  struct Hyper {
    Eigen::VectorXd coef;
    double rhs;
  };
  std::vector<Hyper> hyper;
  std::vector<int> mandatory;
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (const auto& t : lp.rows[i].terms) c[t.var] += t.coef;
    if (lp.rows[i].sense == RowSense::kEqual) mandatory.push_back(static_cast<int>(hyper.size()));
    hyper.push_back({c, lp.rows[i].rhs});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    hyper.push_back({e, lp.lower[j]});
    hyper.push_back({e, lp.upper[j]});
  }
  const int h = static_cast<int>(hyper.size());
  auto feasible = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j)
      if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
    for (int i = 0; i < r; ++i) {
      double act = 0.0;
      for (const auto& t : lp.rows[i].terms) act += t.coef * x[t.var];
      const double slack = lp.rows[i].rhs - act;
      const double scale = tol * (1.0 + std::abs(lp.rows[i].rhs));
      if (lp.rows[i].sense == RowSense::kLessEqual && slack < -scale) return false;
      if (lp.rows[i].sense == RowSense::kGreaterEqual && slack > scale) return false;
      if (lp.rows[i].sense == RowSense::kEqual && std::abs(slack) > scale) return false;
    }
    return true;
  };
  std::optional<double> best;
  std::vector<int> pick(n);
  // Iterate over n-subsets in lexicographic order.
  for (int k = 0; k < n; ++k) pick[k] = k;
  while (true) {
    bool has_mandatory = true;
    for (int mi : mandatory)
      if (std::find(pick.begin(), pick.end(), mi) == pick.end()) has_mandatory = false;
    if (has_mandatory) {
      Eigen::MatrixXd a(n, n);
      Eigen::VectorXd rhs(n);
      for (int k = 0; k < n; ++k) {
        a.row(k) = hyper[pick[k]].coef.transpose();
        rhs[k] = hyper[pick[k]].rhs;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() == n) {
        const Eigen::VectorXd x = lu.solve(rhs);
        if (feasible(x)) {
          double v = lp.objective_constant;
          for (int j = 0; j < n; ++j) v += lp.objective[j] * x[j];
          const bool better = !best || (lp.sense == ObjSense::kMaximize ? v > *best : v < *best);
          if (better) best = v;
        }
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == h - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int t = k + 1; t < n; ++t) pick[t] = pick[t - 1] + 1;
  }
  return best;
}

struct Certificate {
  double primal = 0.0;        // row and bound violation
  double dual_sign = 0.0;     // wrong-signed row duals and reduced costs
  double slackness = 0.0;     // |dual * slack| and |reduced cost * distance to bound|
  double stationarity = 0.0;  // |c_j - sum_r y_r A_rj - rc_j|
};

inline Certificate certificate_residuals(const LpModel& lp, const LpSolution& sol) {
  Certificate c;
  const int n = lp.num_vars();
  const double s = lp.sense == ObjSense::kMaximize ? 1.0 : -1.0;
  std::vector<double> aty(n, 0.0);
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const auto& row = lp.rows[i];
    double act = 0.0;
    for (const auto& t : row.terms) {
      act += t.coef * sol.point[t.var];
      aty[t.var] += t.coef * sol.duals[i];
    }
    const double slack = row.rhs - act;
    const double y = s * sol.duals[i];
    switch (row.sense) {
      case RowSense::kLessEqual:
        c.primal = std::max(c.primal, -slack);
        c.dual_sign = std::max(c.dual_sign, -y);
        break;
      case RowSense::kGreaterEqual:
        c.primal = std::max(c.primal, slack);
        c.dual_sign = std::max(c.dual_sign, y);
        break;
      case RowSense::kEqual:
        c.primal = std::max(c.primal, std::abs(slack));
        break;
    }
    c.slackness = std::max(c.slackness, std::abs(sol.duals[i] * slack));
  }
  for (int j = 0; j < n; ++j) {
    const double x = sol.point[j];
    c.primal = std::max({c.primal, lp.lower[j] - x, x - lp.upper[j]});
    const double rc = s * sol.reduced_costs[j];
    // Maximization orientation: rc > 0 requires x at its upper bound.
    if (rc > 0.0) {
      c.slackness = std::max(c.slackness, std::isfinite(lp.upper[j]) ? rc * (lp.upper[j] - x) : rc);
    } else if (rc < 0.0) {
      c.slackness = std::max(c.slackness, std::isfinite(lp.lower[j]) ? -rc * (x - lp.lower[j]) : -rc);
    }
    c.stationarity = std::max(c.stationarity, std::abs(lp.objective[j] - aty[j] - sol.reduced_costs[j]));
  }
  return c;
}

inline double knapsack_enumeration(const std::vector<double>& w, const std::vector<double>& v, double cap) {
  const int n = static_cast<int>(w.size());
  double best = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double weight = 0.0, value = 0.0;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        weight += w[j];
        value += v[j];
      }
    }
    if (weight <= cap) best = std::max(best, value);
  }
  return best;
}

}  // namespace capmax::testing

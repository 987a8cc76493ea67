#include "capmax/costopt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace capmax {

const char* to_string(KktCase c) {
  switch (c) {
    case KktCase::kBudgetSlack: return "budget-slack";
    case KktCase::kInteriorAnchor: return "interior-anchor";
    case KktCase::kPerturbed: return "perturbed";
    case KktCase::kDegenerate: return "degenerate";
  }
  return "?";
}

namespace {

using Vec = std::vector<double>;

double dot(std::span<const double> u, std::span<const double> v) {
  return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

// Projection onto { sum x <= budget, lo <= x <= hi } by bisection on the
// budget multiplier mu: x(mu) = clip(p - mu, lo, hi).
Vec project_box_budget(std::span<const double> p, double budget, std::span<const double> lo,
                       std::span<const double> hi) {
  const std::size_t n = p.size();
  Vec x(n);
  auto fill = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(p[i] - mu, lo[i], hi[i]);
      s += x[i];
    }
    return s;
  };
  if (fill(0.0) <= budget) return x;
  double mu_lo = 0.0;
  double mu_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) mu_hi = std::max(mu_hi, p[i] - lo[i]);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (mid <= mu_lo || mid >= mu_hi) break;
    if (fill(mid) > budget) mu_lo = mid;
    else mu_hi = mid;
  }
  fill(mu_hi);
  return x;
}

struct Box {
  Vec lo;
  Vec hi;
};

Box scaled_box(const Instance& instance, std::span<const double> y) {
  Box box{Vec(instance.m), Vec(instance.m)};
  for (int i = 0; i < instance.m; ++i) {
    box.lo[i] = y[i] * instance.lower[i];
    box.hi[i] = y[i] * instance.upper[i];
  }
  return box;
}

void check_y(const Instance& instance, std::span<const double> y) {
  if (y.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("y has wrong length");
  double open = 0.0;
  double min_spend = 0.0;
  for (int i = 0; i < instance.m; ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw InvalidInput("y entries must lie in [0,1]");
    open += y[i];
    min_spend += y[i] * instance.lower[i];
  }
  if (open > instance.cap + kFeasibilityTol) {
    throw Infeasible("cardinality violated: sum y = " + std::to_string(open) + " > K = " + std::to_string(instance.cap));
  }
  if (min_spend > instance.budget + kFeasibilityTol) {
    throw Infeasible("budget violated: sum L over open locations = " + std::to_string(min_spend) +
                     " > C = " + std::to_string(instance.budget));
  }
}

struct AscentResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double pg_norm = 0.0;
};

// Projected gradient ascent with Armijo backtracking. The trial step starts
// from a Barzilai-Borwein estimate, which keeps the iteration count
// independent of the objective's scale.
AscentResult projected_ascent(const std::function<double(std::span<const double>)>& value,
                              const std::function<void(std::span<const double>, std::span<double>)>& gradient,
                              const std::function<Vec(std::span<const double>)>& project, Vec x,
                              const CostOptions& opt) {
  const std::size_t n = x.size();
  AscentResult out;
  x = project(x);
  double f = value(x);
  Vec g(n), trial(n), step_to(n), x_prev, g_prev;
  gradient(x, g);
  double step = opt.initial_step;
  for (int it = 0; it < opt.max_iters; ++it) {
    out.iterations = it;
    for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + g[i];
    const Vec unit = project(trial);
    double pg = 0.0;
    for (std::size_t i = 0; i < n; ++i) pg += (unit[i] - x[i]) * (unit[i] - x[i]);
    out.pg_norm = std::sqrt(pg);
    if (out.pg_norm <= opt.tol) {
      out.converged = true;
      break;
    }
    if (!x_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = x[i] - x_prev[i];
        ss += s * s;
        sy -= s * (g[i] - g_prev[i]);
      }
      step = sy > 0.0 ? ss / sy : 1e12;
      step = std::clamp(step, 1e-12, 1e12);
    }
    bool accepted = false;
    Vec next;
    double f_next = f;
    for (int back = 0; back < 200; ++back) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * g[i];
      next = project(trial);
      for (std::size_t i = 0; i < n; ++i) step_to[i] = next[i] - x[i];
      f_next = value(next);
      if (f_next >= f + opt.armijo * dot(g, step_to)) {
        accepted = true;
        break;
      }
      step *= opt.shrink;
    }
    if (!accepted || next == x) break;  // no representable progress left
    x_prev = std::move(x);
    g_prev = g;
    x = std::move(next);
    f = f_next;
    gradient(x, g);
  }
  out.x = std::move(x);
  out.value = f;
  return out;
}

AscentResult ascend_mrum(const Instance& instance, std::span<const double> y, double budget,
                         const CostOptions& opt) {
  const Box box = scaled_box(instance, y);
  Vec start(instance.m);
  for (int i = 0; i < instance.m; ++i) start[i] = 0.5 * (box.lo[i] + box.hi[i]);
  auto value = [&](std::span<const double> x) { return mrum_value(instance, y, x); };
  auto gradient = [&](std::span<const double> x, std::span<double> g) {
    mrum_gradients(instance, y, x, g, {});
  };
  auto project = [&](std::span<const double> p) { return project_box_budget(p, budget, box.lo, box.hi); };
  return projected_ascent(value, gradient, project, std::move(start), opt);
}

bool objective_constant_in_x(const Instance& instance, std::span<const double> y) {
  for (int n = 0; n < instance.zones; ++n)
    for (int i = 0; i < instance.m; ++i)
      if (y[i] > 0.0 && instance.a_at(n, i) > 0.0 && instance.upper[i] > instance.lower[i]) return false;
  return true;
}

enum class BoundState { kInterior, kAtLower, kAtUpper, kFixed };

BoundState classify(double x, double lo, double hi) {
  const double tol_lo = 1e-9 * (1.0 + std::abs(lo));
  const double tol_hi = 1e-9 * (1.0 + std::abs(hi));
  const bool at_lo = x <= lo + tol_lo;
  const bool at_hi = x >= hi - tol_hi;
  if (at_lo && at_hi) return BoundState::kFixed;
  if (at_lo) return BoundState::kAtLower;
  if (at_hi) return BoundState::kAtUpper;
  return BoundState::kInterior;
}

// Splits t_i = df/dx_i - lambda between the two box multipliers according to
// which bound is active.
void assign_box_multipliers(const Vec& t, const std::vector<BoundState>& state, KktMultipliers& mult) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    mult.gamma_u[i] = 0.0;
    mult.gamma_l[i] = 0.0;
    switch (state[i]) {
      case BoundState::kInterior: break;
      case BoundState::kAtUpper: mult.gamma_u[i] = std::max(t[i], 0.0); break;
      case BoundState::kAtLower: mult.gamma_l[i] = std::max(-t[i], 0.0); break;
      case BoundState::kFixed:
        if (t[i] >= 0.0) mult.gamma_u[i] = t[i];
        else mult.gamma_l[i] = -t[i];
        break;
    }
  }
}

KktMultipliers infer_at(const Instance& instance, std::span<const double> y, std::span<const double> x,
                        double budget, const CostOptions& opt, int depth) {
  const int m = instance.m;
  KktMultipliers mult;
  mult.gamma_u.assign(m, 0.0);
  mult.gamma_l.assign(m, 0.0);
  if (objective_constant_in_x(instance, y)) {
    mult.kkt_case = KktCase::kDegenerate;
    return mult;
  }
  const Box box = scaled_box(instance, y);
  Vec g(m);
  mrum_gradients(instance, y, x, g, {});
  std::vector<BoundState> state(m);
  for (int i = 0; i < m; ++i) state[i] = classify(x[i], box.lo[i], box.hi[i]);
  const double spent = std::accumulate(x.begin(), x.end(), 0.0);
  const bool tight = budget - spent <= 1e-9 * (1.0 + budget);

  Vec t(m);
  auto finish = [&](double lambda) {
    mult.lambda = lambda;
    for (int i = 0; i < m; ++i) t[i] = g[i] - lambda;
    assign_box_multipliers(t, state, mult);
  };

  if (!tight) {
    mult.kkt_case = KktCase::kBudgetSlack;
    finish(0.0);
    return mult;
  }

  int anchor = -1;
  double best_slack = 0.0;
  for (int i = 0; i < m; ++i) {
    if (state[i] != BoundState::kInterior) continue;
    const double slack = std::min(x[i] - box.lo[i], box.hi[i] - x[i]);
    if (slack > best_slack) {
      best_slack = slack;
      anchor = i;
    }
  }
  if (anchor >= 0) {
    mult.kkt_case = KktCase::kInteriorAnchor;
    finish(std::max(g[anchor], 0.0));
    return mult;
  }

  // Every coordinate sits at a bound and the budget is tight: the multipliers
  // are not unique. Loosen the budget slightly so one of the cases above
  // applies, then keep the resulting lambda inside the interval that is
  // exactly stationary at the original point.
  if (depth > 4) throw KktError("multiplier inference: budget perturbation did not leave the degenerate case", 0.0);
  const double eps = opt.perturb_scale * (1.0 + instance.budget) * std::pow(10.0, depth);
  const AscentResult perturbed = ascend_mrum(instance, y, budget + eps, opt);
  const KktMultipliers inner = infer_at(instance, y, perturbed.x, budget + eps, opt, depth + 1);

  double lambda_lo = 0.0;
  double lambda_hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (state[i] == BoundState::kAtLower) lambda_lo = std::max(lambda_lo, g[i]);
    if (state[i] == BoundState::kAtUpper) lambda_hi = std::min(lambda_hi, g[i]);
  }
  double lambda = inner.lambda;
  if (lambda_lo <= lambda_hi) lambda = std::clamp(lambda, lambda_lo, lambda_hi);
  finish(lambda);
  mult.kkt_case = KktCase::kPerturbed;
  mult.budget_perturbation = inner.kkt_case == KktCase::kPerturbed ? inner.budget_perturbation : eps;
  mult.lambda_perturbed = inner.lambda;
  return mult;
}

}  // namespace

std::vector<double> project_knapsack_box(std::span<const double> point, double budget,
                                         std::span<const double> lower, std::span<const double> upper,
                                         std::span<const double> active) {
  const std::size_t n = point.size();
  if (lower.size() != n || upper.size() != n || active.size() != n) {
    throw InvalidInput("project_knapsack_box: dimension mismatch");
  }
  Vec lo(n), hi(n);
  double min_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = active[i] * lower[i];
    hi[i] = active[i] * upper[i];
    if (lo[i] > hi[i]) throw Infeasible("project_knapsack_box: empty box at coordinate " + std::to_string(i));
    min_sum += lo[i];
  }
  if (min_sum > budget + kFeasibilityTol) throw Infeasible("project_knapsack_box: lower bounds exceed the budget");
  return project_box_budget(point, budget, lo, hi);
}

CostResult solve_cost_mrum(const Instance& instance, std::span<const double> y, const CostOptions& options) {
  check_y(instance, y);
  CostResult result;
  if (objective_constant_in_x(instance, y)) {
    const Box box = scaled_box(instance, y);
    result.x_star = box.lo;
    result.value = mrum_value(instance, y, result.x_star);
    result.multipliers.gamma_u.assign(instance.m, 0.0);
    result.multipliers.gamma_l.assign(instance.m, 0.0);
    result.multipliers.kkt_case = KktCase::kDegenerate;
    result.converged = true;
    return result;
  }
  AscentResult ascent = ascend_mrum(instance, y, instance.budget, options);
  result.x_star = std::move(ascent.x);
  result.value = ascent.value;
  result.iterations = ascent.iterations;
  result.converged = ascent.converged;
  result.pg_norm = ascent.pg_norm;
  result.multipliers = infer_multipliers(instance, y, result.x_star, options);
  return result;
}

KktResiduals kkt_residuals(const Instance& instance, std::span<const double> y, std::span<const double> x,
                           const KktMultipliers& mult) {
  const int m = instance.m;
  Vec g(m);
  mrum_gradients(instance, y, x, g, {});
  KktResiduals r;
  const double spent = std::accumulate(x.begin(), x.end(), 0.0);
  r.slackness = std::abs(mult.lambda * (spent - instance.budget));
  r.sign = std::max(0.0, -mult.lambda);
  for (int i = 0; i < m; ++i) {
    r.stationarity = std::max(r.stationarity, std::abs(g[i] - mult.lambda - mult.gamma_u[i] + mult.gamma_l[i]));
    r.slackness = std::max(r.slackness, std::abs(mult.gamma_u[i] * (x[i] - y[i] * instance.upper[i])));
    r.slackness = std::max(r.slackness, std::abs(mult.gamma_l[i] * (x[i] - y[i] * instance.lower[i])));
    r.sign = std::max({r.sign, -mult.gamma_u[i], -mult.gamma_l[i]});
  }
  return r;
}

KktMultipliers infer_multipliers(const Instance& instance, std::span<const double> y,
                                 std::span<const double> x_star, const CostOptions& options) {
  check_y(instance, y);
  if (x_star.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("x_star has wrong length");
  KktMultipliers mult = infer_at(instance, y, x_star, instance.budget, options, 0);
  const KktResiduals r = kkt_residuals(instance, y, x_star, mult);
  if (r.stationarity > options.kkt_tol) {
    std::ostringstream msg;
    msg << "multiplier inference: stationarity residual " << r.stationarity << " exceeds " << options.kkt_tol
        << " (case " << to_string(mult.kkt_case) << "); the cost vector is not optimal";
    throw KktError(msg.str(), r.stationarity);
  }
  return mult;
}

std::vector<LocalMaximum> probe_arum_landscape(const Instance& instance, std::span<const double> y,
                                               const std::vector<std::vector<double>>& starts,
                                               double cluster_radius) {
  check_y(instance, y);
  const Box box = scaled_box(instance, y);
  CostOptions opt;
  opt.tol = 1e-11;
  auto value = [&](std::span<const double> x) { return arum_value(instance, y, x); };
  auto gradient = [&](std::span<const double> x, std::span<double> g) { arum_gradient_x(instance, y, x, g); };
  auto project = [&](std::span<const double> p) {
    return project_box_budget(p, instance.budget, box.lo, box.hi);
  };

  std::vector<LocalMaximum> maxima;
  for (const auto& start : starts) {
    if (start.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("probe start has wrong length");
    double spent = 0.0;
    for (int i = 0; i < instance.m; ++i) {
      if (start[i] < box.lo[i] - kFeasibilityTol || start[i] > box.hi[i] + kFeasibilityTol) {
        throw Infeasible("probe start violates the cost bounds at location " + std::to_string(i));
      }
      spent += start[i];
    }
    if (spent > instance.budget + kFeasibilityTol) throw Infeasible("probe start violates the budget");

    const AscentResult r = projected_ascent(value, gradient, project, start, opt);
    auto near = std::find_if(maxima.begin(), maxima.end(), [&](const LocalMaximum& lm) {
      double d2 = 0.0;
      for (int i = 0; i < instance.m; ++i) d2 += (lm.x[i] - r.x[i]) * (lm.x[i] - r.x[i]);
      return std::sqrt(d2) <= cluster_radius;
    });
    if (near == maxima.end()) {
      maxima.push_back({r.x, r.value, 1});
    } else {
      ++near->hits;
      if (r.value > near->value) {
        near->x = r.x;
        near->value = r.value;
      }
    }
  }
  std::stable_sort(maxima.begin(), maxima.end(),
                   [](const LocalMaximum& l, const LocalMaximum& r) { return l.value > r.value; });
  return maxima;
}

}  // namespace capmax

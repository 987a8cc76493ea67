#include "capmax/moa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "capmax/costopt.hpp"

namespace capmax {

std::vector<std::vector<int>> partition_zones(int zones, int groups) {
  if (zones < 1 || groups < 1) throw InvalidInput("partition_zones: zones and groups must be positive");
  const int g = std::min(groups, zones);
  const int base = zones / g;
  const int extra = zones % g;
  std::vector<std::vector<int>> out(g);
  int next = 0;
  for (int l = 0; l < g; ++l) {
    const int size = base + (l < extra ? 1 : 0);
    for (int k = 0; k < size; ++k) out[l].push_back(next++);
  }
  return out;
}

GroupEval group_value_and_gradient(const Instance& instance, std::span<const int> group, std::span<const double> y,
                                   std::span<const double> z) {
  const int m = instance.m;
  if (y.size() != static_cast<std::size_t>(m) || z.size() != static_cast<std::size_t>(m)) {
    throw InvalidInput("group evaluation: y and z must have m entries");
  }
  GroupEval out;
  out.grad_y.assign(m, 0.0);
  out.grad_z.assign(m, 0.0);
  for (int n : group) {
    if (n < 0 || n >= instance.zones) throw InvalidInput("group evaluation: zone index out of range");
    double d = instance.u_comp[n];
    for (int i = 0; i < m; ++i) d += instance.a_at(n, i) * z[i] + instance.b_at(n, i) * y[i];
    if (!(d > 0.0)) {
      throw InvalidInput("group evaluation: nonpositive denominator in zone " + std::to_string(n));
    }
    const double qu = instance.q[n] * instance.u_comp[n];
    out.value += instance.q[n] * (d - instance.u_comp[n]) / d;
    const double w = qu / (d * d);
    for (int i = 0; i < m; ++i) {
      out.grad_z[i] += w * instance.a_at(n, i);
      out.grad_y[i] += w * instance.b_at(n, i);
    }
  }
  return out;
}

double Cut::evaluate(std::span<const double> y, std::span<const double> z) const {
  double v = intercept;
  for (std::size_t i = 0; i < grad_y.size(); ++i) v += grad_y[i] * y[i] + grad_z[i] * z[i];
  return v;
}

namespace {

struct Layout {
  int m = 0;
  int x(int i) const { return i; }
  int z(int i) const { return m + i; }
  int y(int i) const { return 2 * m + i; }
  int theta(int l) const { return 3 * m + l; }
};

MilpModel base_master(const Instance& instance, const std::vector<std::vector<int>>& groups, const Layout& at) {
  const int m = instance.m;
  MilpModel master;
  LpModel& lp = master.lp;
  lp.sense = ObjSense::kMaximize;
  for (int i = 0; i < m; ++i) lp.add_variable(0.0, instance.upper[i]);
  for (int i = 0; i < m; ++i) lp.add_variable(0.0, instance.upper[i]);
  for (int i = 0; i < m; ++i) master.add_binary();
  for (const auto& g : groups) {
    double cap = 0.0;
    for (int n : g) cap += instance.q[n];
    lp.add_variable(0.0, cap, 1.0);
  }
  std::vector<LinearTerm> card, budget;
  for (int i = 0; i < m; ++i) {
    card.push_back({at.y(i), 1.0});
    budget.push_back({at.z(i), 1.0});
  }
  lp.add_row(card, RowSense::kLessEqual, instance.cap);
  lp.add_row(budget, RowSense::kLessEqual, instance.budget);
  for (int i = 0; i < m; ++i) {
    const double lo = instance.lower[i];
    const double hi = instance.upper[i];
    lp.add_row({{at.x(i), 1.0}, {at.y(i), -hi}}, RowSense::kLessEqual, 0.0);
    lp.add_row({{at.x(i), 1.0}, {at.y(i), -lo}}, RowSense::kGreaterEqual, 0.0);
    lp.add_row({{at.z(i), 1.0}, {at.y(i), -hi}}, RowSense::kLessEqual, 0.0);
    lp.add_row({{at.z(i), 1.0}, {at.y(i), -lo}}, RowSense::kGreaterEqual, 0.0);
    // x ranges over [0, U] once closed sites are included, so the envelope
    // side z <= x - L (1 - y) becomes z <= x.
    lp.add_row({{at.z(i), 1.0}, {at.x(i), -1.0}}, RowSense::kLessEqual, 0.0);
    lp.add_row({{at.z(i), 1.0}, {at.x(i), -1.0}, {at.y(i), -hi}}, RowSense::kGreaterEqual, -hi);
  }
  return master;
}

Cut make_cut(int l, GroupEval e, std::span<const double> y, std::span<const double> z) {
  Cut cut;
  cut.group = l;
  cut.anchor_y.assign(y.begin(), y.end());
  cut.anchor_z.assign(z.begin(), z.end());
  cut.intercept = e.value;
  for (std::size_t i = 0; i < y.size(); ++i) cut.intercept -= e.grad_y[i] * y[i] + e.grad_z[i] * z[i];
  cut.grad_y = std::move(e.grad_y);
  cut.grad_z = std::move(e.grad_z);
  return cut;
}

void add_cut_row(LpModel& lp, const Cut& cut, const Layout& at) {
  std::vector<LinearTerm> terms{{at.theta(cut.group), 1.0}};
  for (int i = 0; i < at.m; ++i) {
    if (cut.grad_y[i] != 0.0) terms.push_back({at.y(i), -cut.grad_y[i]});
    if (cut.grad_z[i] != 0.0) terms.push_back({at.z(i), -cut.grad_z[i]});
  }
  lp.add_row(std::move(terms), RowSense::kLessEqual, cut.intercept);
}

}  // namespace

JointResult solve_moa(const Instance& instance, const MoaConfig& config, MoaState* state) {
  instance.validate();
  if (config.groups < 1) throw InvalidInput("moa: the number of cut groups must be at least 1");
  if (config.max_iters < 1) throw InvalidInput("moa: max_iters must be at least 1");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const int m = instance.m;
  MoaState local;
  MoaState& st = state ? *state : local;
  st.groups = partition_zones(instance.zones, config.groups);
  st.cuts.clear();
  st.tau = config.tau > 0.0 ? config.tau : 1e-6 * (1.0 + instance.total_demand());
  const int num_groups = static_cast<int>(st.groups.size());
  const Layout at{m};

  const std::vector<double> zeros(m, 0.0);
  for (int l = 0; l < num_groups; ++l) {
    st.cuts.push_back(make_cut(l, group_value_and_gradient(instance, st.groups[l], zeros, zeros), zeros, zeros));
  }

  JointResult result;
  result.method = "moa";
  result.solution = Solution::closed(m);
  result.value = 0.0;
  result.bound = kInf;
  result.status = JointStatus::kLimit;

  const MilpModel base = base_master(instance, st.groups, at);
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const double remaining = config.time_limit - elapsed();
    if (remaining <= 0.0) break;
    MilpModel master = base;
    for (const auto& cut : st.cuts) add_cut_row(master.lp, cut, at);
    MilpOptions mopt;
    mopt.tol = config.master_tol;
    mopt.time_limit = remaining;
    const MilpSolution ms = solve_milp(master, mopt);
    ++result.evaluations;
    if (ms.status == MilpStatus::kInfeasible || ms.status == MilpStatus::kUnbounded) {
      std::ostringstream msg;
      msg << "moa: master problem " << to_string(ms.status) << " at iteration " << iter << " with "
          << st.cuts.size() << " cuts";
      throw std::logic_error(msg.str());
    }
    result.bound = std::min(result.bound, ms.bound);
    if (ms.status == MilpStatus::kLimit || ms.point.empty()) break;

    std::vector<double> y(m), z(m);
    for (int i = 0; i < m; ++i) {
      y[i] = ms.point[at.y(i)];
      z[i] = std::max(0.0, ms.point[at.z(i)]);
    }
    double theta_sum = 0.0;
    for (int l = 0; l < num_groups; ++l) theta_sum += ms.point[at.theta(l)];
    std::vector<GroupEval> evals;
    double phi_sum = 0.0;
    for (int l = 0; l < num_groups; ++l) {
      evals.push_back(group_value_and_gradient(instance, st.groups[l], y, z));
      phi_sum += evals.back().value;
    }

    // The cost-optimal point for y* is at least as good as the master's.
    const CostResult polished = solve_cost_mrum(instance, y);
    if (polished.value > result.value) {
      result.value = polished.value;
      result.solution.y.assign(y.begin(), y.end());
      result.solution.x = polished.x_star;
    }
    result.log.push_back({iter, result.bound, result.value, result.bound - result.value, elapsed()});

    if (theta_sum <= phi_sum + st.tau || result.bound <= result.value + st.tau) {
      result.status = JointStatus::kOptimal;
      break;
    }
    for (int l = 0; l < num_groups; ++l) st.cuts.push_back(make_cut(l, std::move(evals[l]), y, z));
  }
  result.bound = std::max(result.bound, result.value);
  result.seconds = elapsed();
  return result;
}

}  // namespace capmax

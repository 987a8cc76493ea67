#include "capmax/oracle.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "capmax/costopt.hpp"

namespace capmax {

namespace {

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> axis;
  const long n = static_cast<long>(std::floor((hi - lo) / step));
  for (long k = 0; k <= n; ++k) axis.push_back(lo + static_cast<double>(k) * step);
  if (axis.empty() || axis.back() < hi) axis.push_back(hi);
  return axis;
}

}  // namespace

GridResult grid_cost_oracle(const Instance& instance, std::span<const std::uint8_t> y, double step) {
  instance.validate();
  if (!(step > 0.0)) throw InvalidInput("grid step must be positive");
  if (y.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("open set has wrong length");
  std::vector<int> open;
  double lower_sum = 0.0;
  for (int i = 0; i < instance.m; ++i) {
    if (y[i] > 1) throw InvalidInput("open set entries must be 0 or 1");
    if (y[i]) {
      open.push_back(i);
      lower_sum += instance.lower[i];
    }
  }
  if (static_cast<int>(open.size()) > kGridMaxOpen) {
    throw InvalidInput("grid oracle supports at most " + std::to_string(kGridMaxOpen) + " open locations");
  }
  if (static_cast<int>(open.size()) > instance.cap) throw Infeasible("cardinality violated");
  if (lower_sum > instance.budget + kFeasibilityTol) throw Infeasible("budget violated: sum of lower bounds exceeds C");

  const std::vector<double> yr(y.begin(), y.end());
  GridResult out;
  out.x.assign(instance.m, 0.0);
  for (int i : open) out.x[i] = instance.lower[i];
  if (open.empty()) {
    out.value = 0.0;
    out.points = 1;
    return out;
  }

  // Gradient bound: denominators are smallest with every cost at its lower
  // bound.
  for (int i : open) {
    double g = 0.0;
    for (int n = 0; n < instance.zones; ++n) {
      const double d = mrum_denominator(instance, yr, out.x, n);
      g += instance.q[n] * instance.u_comp[n] * instance.a_at(n, i) / (d * d);
    }
    out.lipschitz = std::max(out.lipschitz, g);
  }
  const int d = static_cast<int>(open.size());
  out.error_bound = out.lipschitz * step * std::max(1, d - 1);

  std::vector<std::vector<double>> axes;
  for (int k = 0; k + 1 < d; ++k) axes.push_back(grid_axis(instance.lower[open[k]], instance.upper[open[k]], step));
  const int last = open.back();
  std::vector<std::size_t> pos(axes.size(), 0);
  std::vector<double> x = out.x;
  out.value = -1.0;
  while (true) {
    double spent = 0.0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      x[open[k]] = axes[k][pos[k]];
      spent += x[open[k]];
    }
    const double room = instance.budget - spent;
    if (room >= instance.lower[last]) {
      x[last] = std::min(instance.upper[last], room);
      const double v = mrum_value(instance, yr, x);
      ++out.points;
      if (v > out.value) {
        out.value = v;
        out.x = x;
      }
    }
    std::size_t k = 0;
    while (k < pos.size() && ++pos[k] == axes[k].size()) pos[k++] = 0;
    if (k == pos.size()) break;
  }
  return out;
}

JointResult brute_force_joint(const Instance& instance, const BruteForceOptions& options) {
  instance.validate();
  if (instance.m > kBruteForceMaxM) {
    throw InvalidInput("brute force limited to m <= " + std::to_string(kBruteForceMaxM) + " (got " +
                       std::to_string(instance.m) + ")");
  }
  const auto start = std::chrono::steady_clock::now();
  JointResult best;
  best.method = "oracle";
  best.solution = Solution::closed(instance.m);
  best.value = 0.0;

  const std::uint32_t limit = 1u << instance.m;
  std::vector<double> y(instance.m);
  std::vector<std::uint8_t> yb(instance.m);
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    if (std::popcount(mask) > instance.cap) continue;
    double lower = 0.0;
    for (int i = 0; i < instance.m; ++i) {
      yb[i] = (mask >> i) & 1u;
      y[i] = yb[i];
      lower += yb[i] * instance.lower[i];
    }
    if (lower > instance.budget + kFeasibilityTol) continue;
    const CostResult r = solve_cost_mrum(instance, y);
    ++best.evaluations;
    if (options.cross_check_step > 0.0 && std::popcount(mask) <= kGridMaxOpen) {
      const GridResult g = grid_cost_oracle(instance, yb, options.cross_check_step);
      if (r.value < g.value - 1e-12 || r.value > g.value + g.error_bound + 1e-12) {
        std::ostringstream msg;
        msg << "cost solver disagrees with grid oracle on mask " << mask << ": solver " << r.value << ", grid "
            << g.value << " (+" << g.error_bound << ")";
        throw std::logic_error(msg.str());
      }
    }
    if (r.value > best.value + 1e-12 * (1.0 + best.value)) {
      best.value = r.value;
      best.solution.y = yb;
      best.solution.x = r.x_star;
    }
  }
  best.bound = best.value;
  best.status = JointStatus::kOptimal;
  best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace capmax

#include "capmax/localsearch.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace capmax {

const PhiEval* PhiCache::find(std::span<const std::uint8_t> y) const {
  const auto it = entries_.find(std::vector<std::uint8_t>(y.begin(), y.end()));
  if (it == entries_.end()) return nullptr;
  ++hits_;
  return &it->second;
}

const PhiEval& PhiCache::insert(PhiEval eval) {
  auto key = eval.y;
  return entries_.insert_or_assign(std::move(key), std::move(eval)).first->second;
}

PhiEval eval_phi(const Instance& instance, std::span<const std::uint8_t> y, PhiCache* cache) {
  if (y.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("eval_phi: y must have m entries");
  for (auto v : y) {
    if (v > 1) throw InvalidInput("eval_phi: y entries must be 0 or 1");
  }
  if (cache) {
    if (const PhiEval* hit = cache->find(y)) return *hit;
  }
  PhiEval out;
  out.y.assign(y.begin(), y.end());
  const std::vector<double> yr(y.begin(), y.end());
  out.inner = solve_cost_mrum(instance, yr);
  out.value = out.inner.value;
  if (cache) cache->insert(out);
  return out;
}

std::vector<double> grad_phi(const Instance& instance, std::span<const double> y) {
  const CostResult r = solve_cost_mrum(instance, y);
  std::vector<double> gy(instance.m);
  mrum_gradients(instance, y, r.x_star, {}, gy);
  const KktMultipliers& mu = r.multipliers;
  for (int i = 0; i < instance.m; ++i) {
    gy[i] += mu.gamma_u[i] * instance.upper[i] - mu.gamma_l[i] * instance.lower[i];
  }
  return gy;
}

namespace {

class Search {
 public:
  Search(const Instance& instance, const LocalSearchParams& params)
      : inst_(instance), params_(params), start_(std::chrono::steady_clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  bool out_of_time() const { return elapsed() >= params_.time_limit; }

  bool feasible(const std::vector<std::uint8_t>& y) const {
    int open = 0;
    double lower = 0.0;
    for (int i = 0; i < inst_.m; ++i) {
      open += y[i];
      if (y[i]) lower += inst_.lower[i];
    }
    return open <= inst_.cap && lower <= inst_.budget + kFeasibilityTol;
  }

  static bool improves(double candidate, double current) {
    return candidate > current + 1e-12 * (1.0 + std::abs(current));
  }

  // Evaluates the candidates in order and keeps the first strict maximum,
  // so ties go to the earliest candidate.
  bool best_move(const std::vector<std::vector<std::uint8_t>>& candidates, PhiEval& current) {
    const PhiEval* best = nullptr;
    PhiEval holder;
    double best_value = current.value;
    for (const auto& y : candidates) {
      if (out_of_time()) {
        limit_hit = true;
        break;
      }
      if (!feasible(y)) continue;
      PhiEval e = eval(y);
      if (improves(e.value, best_value)) {
        best_value = e.value;
        holder = std::move(e);
        best = &holder;
      }
    }
    if (!best) return false;
    current = std::move(holder);
    return true;
  }

  PhiEval eval(const std::vector<std::uint8_t>& y) {
    if (const PhiEval* hit = cache_.find(y)) return *hit;
    ++evaluations;
    return cache_.insert(eval_phi(inst_, y));
  }

  void greedy(PhiEval& current) {
    while (std::count(current.y.begin(), current.y.end(), 1) < inst_.cap && !limit_hit) {
      std::vector<std::vector<std::uint8_t>> cands;
      for (int i = 0; i < inst_.m; ++i) {
        if (current.y[i]) continue;
        cands.push_back(current.y);
        cands.back()[i] = 1;
      }
      if (!best_move(cands, current)) break;
    }
  }

  void gradient_step(PhiEval& current) {
    while (!limit_hit) {
      const std::vector<double> yr(current.y.begin(), current.y.end());
      std::vector<double> g;
      try {
        g = grad_phi(inst_, yr);
      } catch (const KktError&) {
        return;
      }
      // First-order change of Phi when flipping y_i.
      std::vector<double> gain(inst_.m);
      for (int i = 0; i < inst_.m; ++i) gain[i] = current.y[i] ? -g[i] : g[i];
      std::vector<int> order(inst_.m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return gain[a] > gain[b]; });
      std::vector<std::vector<std::uint8_t>> cands;
      for (int i : order) {
        if (static_cast<int>(cands.size()) >= params_.top_k) break;
        auto y = current.y;
        y[i] ^= 1u;
        if (!feasible(y)) continue;
        cands.push_back(std::move(y));
      }
      if (!best_move(cands, current)) break;
    }
  }

  bool exchange(PhiEval& current) {
    bool moved = false;
    while (!limit_hit) {
      std::vector<std::vector<std::uint8_t>> cands;
      for (int i = 0; i < inst_.m; ++i) {
        if (!current.y[i]) continue;
        for (int j = 0; j < inst_.m; ++j) {
          if (current.y[j]) continue;
          cands.push_back(current.y);
          cands.back()[i] = 0;
          cands.back()[j] = 1;
        }
      }
      if (!best_move(cands, current)) break;
      moved = true;
    }
    return moved;
  }

  long evaluations = 0;
  bool limit_hit = false;
  long cache_hits() const { return cache_.hits(); }

 private:
  const Instance& inst_;
  LocalSearchParams params_;
  std::chrono::steady_clock::time_point start_;
  PhiCache cache_;
};

}  // namespace

LocalSearchResult local_search(const Instance& instance, const LocalSearchParams& params) {
  instance.validate();
  if (params.max_iters < 0) throw InvalidInput("local search: max_iters must be nonnegative");
  if (params.top_k < 1) throw InvalidInput("local search: top_k must be at least 1");

  Search search(instance, params);
  PhiEval current = eval_phi(instance, std::vector<std::uint8_t>(instance.m, 0));
  search.greedy(current);
  LocalSearchResult out;
  out.greedy = current;

  JointResult& jr = out.joint;
  jr.method = "ls";
  jr.bound = kInf;
  int round = 0;
  jr.log.push_back({round, kInf, current.value, kInf, search.elapsed()});
  bool stalled = false;
  while (!search.limit_hit && round < params.max_iters) {
    ++round;
    search.gradient_step(current);
    // Both steps run to exhaustion, so a round without an exchange ends at a
    // point neither step can improve.
    stalled = !search.exchange(current);
    jr.log.push_back({round, kInf, current.value, kInf, search.elapsed()});
    if (stalled) break;
  }

  jr.status = (stalled && !search.limit_hit) ? JointStatus::kLocalOptimum : JointStatus::kLimit;
  jr.solution.y = current.y;
  jr.solution.x = current.inner.x_star;
  jr.value = current.value;
  jr.evaluations = search.evaluations;
  jr.seconds = search.elapsed();
  out.phi_evaluations = search.evaluations;
  out.cache_hits = search.cache_hits();
  return out;
}

}  // namespace capmax

#include "capmax/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>

namespace capmax {

int LpModel::add_variable(double lb, double ub, double obj) {
  lower.push_back(lb);
  upper.push_back(ub);
  objective.push_back(obj);
  return num_vars() - 1;
}

int LpModel::add_row(std::vector<LinearTerm> terms, RowSense sense, double rhs) {
  rows.push_back({std::move(terms), sense, rhs});
  return static_cast<int>(rows.size()) - 1;
}

void LpModel::validate() const {
  const int n = num_vars();
  if (lower.size() != objective.size() || upper.size() != objective.size()) {
    throw std::invalid_argument("lp: bound arrays do not match the variable count");
  }
  if (!std::isfinite(objective_constant)) throw std::invalid_argument("lp: non-finite objective constant");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw std::invalid_argument("lp: non-finite objective coefficient");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
        upper[j] == -kInf) {
      throw std::invalid_argument("lp: bad bounds on variable " + std::to_string(j));
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!std::isfinite(rows[r].rhs)) throw std::invalid_argument("lp: non-finite rhs in row " + std::to_string(r));
    for (const auto& t : rows[r].terms) {
      if (t.var < 0 || t.var >= n) throw std::invalid_argument("lp: variable index out of range in row " + std::to_string(r));
      if (!std::isfinite(t.coef)) throw std::invalid_argument("lp: non-finite coefficient in row " + std::to_string(r));
    }
  }
}

int MilpModel::add_binary(double obj) {
  const int j = lp.add_variable(0.0, 1.0, obj);
  binaries.push_back(j);
  return j;
}

void MilpModel::validate() const {
  lp.validate();
  for (int j : binaries) {
    if (j < 0 || j >= lp.num_vars()) throw std::invalid_argument("milp: binary index out of range");
    if (lp.lower[j] < 0.0 || lp.upper[j] > 1.0) throw std::invalid_argument("milp: binary variable bounds exceed [0,1]");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kUnbounded: return "unbounded";
    case MilpStatus::kLimit: return "limit";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPrimalTol = 1e-9;

// Simplex on the compact tableau x_B = beta - T x_N, where only the columns
// of nonbasic variables are stored. Variables are numbered structurals,
// then one slack per row, then artificials.
class Simplex {
 public:
  Simplex(const LpModel& model, const LpOptions& options) : model_(model), opt_(options) {
    n_ = model.num_vars();
    r_ = static_cast<int>(model.rows.size());
    max_iters_ = opt_.max_iters > 0 ? opt_.max_iters : 50 * (r_ + n_) + 1000;
    dual_tol_ = std::max(1e-11, std::min(1e-9, opt_.tol));
  }

  LpSolution run() {
    setup();
    LpSolution sol;
    if (num_art_ > 0) {
      std::vector<double> cost(total_, 0.0);
      for (int j = n_ + r_; j < total_; ++j) cost[j] = 1.0;
      const Outcome phase1 = iterate(cost);
      (void)phase1;  // bounded below by zero
      double infeas = 0.0;
      for (int j = n_ + r_; j < total_; ++j) infeas += val_[j];
      if (infeas > 1e-7 * (1.0 + rhs_scale_)) {
        sol.status = LpStatus::kInfeasible;
        sol.iterations = iters_;
        return sol;
      }
      drop_artificials();
    }
    std::vector<double> cost(total_, 0.0);
    const double sign = model_.sense == ObjSense::kMaximize ? -1.0 : 1.0;
    for (int j = 0; j < n_; ++j) cost[j] = sign * model_.objective[j];
    if (iterate(cost) == Outcome::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      sol.iterations = iters_;
      return sol;
    }
    sol.status = LpStatus::kOptimal;
    sol.iterations = iters_;
    sol.point.assign(val_.begin(), val_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      // Snap to bounds that were hit up to roundoff.
      if (std::isfinite(lb_[j]) && std::abs(sol.point[j] - lb_[j]) <= 1e-11 * (1.0 + std::abs(lb_[j]))) sol.point[j] = lb_[j];
      if (std::isfinite(ub_[j]) && std::abs(sol.point[j] - ub_[j]) <= 1e-11 * (1.0 + std::abs(ub_[j]))) sol.point[j] = ub_[j];
    }
    sol.value = model_.objective_constant;
    for (int j = 0; j < n_; ++j) sol.value += model_.objective[j] * sol.point[j];
    // Duals: y_r = -d(slack_r) when the slack is nonbasic, zero otherwise.
    reduced_costs(cost);
    sol.duals.assign(r_, 0.0);
    sol.reduced_costs.assign(n_, 0.0);
    for (std::size_t k = 0; k < nb_.size(); ++k) {
      const int v = nb_[k];
      if (v >= n_ && v < n_ + r_) sol.duals[v - n_] = -sign * d_[k];
      if (v < n_) sol.reduced_costs[v] = sign * d_[k];
    }
    return sol;
  }

 private:
  enum class Outcome { kOptimal, kUnbounded };

  void setup() {
    std::vector<int> bad_rows;
    std::vector<double> sigma(r_, 1.0);
    lb_.assign(n_ + r_, 0.0);
    ub_.assign(n_ + r_, 0.0);
    val_.assign(n_ + r_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = model_.lower[j];
      ub_[j] = model_.upper[j];
      val_[j] = std::isfinite(lb_[j]) ? lb_[j] : (std::isfinite(ub_[j]) ? ub_[j] : 0.0);
    }
    rhs_scale_ = 0.0;
    for (int r = 0; r < r_; ++r) {
      const auto& row = model_.rows[r];
      const int s = n_ + r;
      switch (row.sense) {
        case RowSense::kLessEqual: lb_[s] = 0.0; ub_[s] = kInf; break;
        case RowSense::kGreaterEqual: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case RowSense::kEqual: lb_[s] = 0.0; ub_[s] = 0.0; break;
      }
      double activity = 0.0;
      for (const auto& t : row.terms) activity += t.coef * val_[t.var];
      const double slack = row.rhs - activity;
      rhs_scale_ = std::max(rhs_scale_, std::abs(row.rhs));
      if (slack >= lb_[s] - kPrimalTol && slack <= ub_[s] + kPrimalTol) {
        val_[s] = std::clamp(slack, lb_[s], ub_[s]);
      } else {
        val_[s] = slack < lb_[s] ? lb_[s] : ub_[s];
        sigma[r] = slack - val_[s] > 0.0 ? 1.0 : -1.0;
        bad_rows.push_back(r);
      }
    }
    num_art_ = static_cast<int>(bad_rows.size());
    total_ = n_ + r_ + num_art_;
    lb_.resize(total_, 0.0);
    ub_.resize(total_, kInf);
    val_.resize(total_, 0.0);

    // Basis: slack for good rows, artificial for bad rows.
    bs_.assign(r_, -1);
    std::vector<int> art_of_row(r_, -1);
    for (int k = 0; k < num_art_; ++k) art_of_row[bad_rows[k]] = n_ + r_ + k;
    nb_.clear();
    for (int j = 0; j < n_; ++j) nb_.push_back(j);
    for (int r = 0; r < r_; ++r) {
      if (art_of_row[r] >= 0) {
        bs_[r] = art_of_row[r];
        nb_.push_back(n_ + r);
      } else {
        bs_[r] = n_ + r;
      }
    }
    const int k = static_cast<int>(nb_.size());
    t_.assign(static_cast<std::size_t>(r_) * k, 0.0);
    beta_.assign(r_, 0.0);
    for (int r = 0; r < r_; ++r) {
      const auto& row = model_.rows[r];
      for (const auto& t : row.terms) at(r, t.var) += sigma[r] * t.coef;
      beta_[r] = sigma[r] * row.rhs;
    }
    for (int c = n_; c < k; ++c) {
      const int r = nb_[c] - n_;
      at(r, c) = sigma[r];
    }
    refresh_basic_values();
  }

  double& at(int row, int col) { return t_[static_cast<std::size_t>(row) * nb_.size() + col]; }
  double at(int row, int col) const { return t_[static_cast<std::size_t>(row) * nb_.size() + col]; }

  void refresh_basic_values() {
    const std::size_t k = nb_.size();
    for (int r = 0; r < r_; ++r) {
      double v = beta_[r];
      const double* row = &t_[static_cast<std::size_t>(r) * k];
      for (std::size_t c = 0; c < k; ++c) v -= row[c] * val_[nb_[c]];
      val_[bs_[r]] = v;
    }
  }

  void reduced_costs(const std::vector<double>& cost) {
    const std::size_t k = nb_.size();
    d_.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) d_[c] = cost[nb_[c]];
    for (int r = 0; r < r_; ++r) {
      const double cb = cost[bs_[r]];
      if (cb == 0.0) continue;
      const double* row = &t_[static_cast<std::size_t>(r) * k];
      for (std::size_t c = 0; c < k; ++c) d_[c] -= cb * row[c];
    }
  }

  Outcome iterate(const std::vector<double>& cost) {
    int degenerate_run = 0;
    bool bland = false;
    const int degenerate_limit = 2 * (r_ + n_);
    const std::size_t k = nb_.size();
    while (true) {
      if (iters_ >= max_iters_) throw LpStallError(describe_stall());
      reduced_costs(cost);
      // Pricing.
      int enter = -1;
      double dir = 0.0;
      double best = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const int v = nb_[c];
        if (lb_[v] == ub_[v]) continue;
        const double dj = d_[c];
        double score = 0.0;
        double candidate_dir = 0.0;
        if (dj < -dual_tol_ && val_[v] < ub_[v]) {
          score = -dj;
          candidate_dir = 1.0;
        } else if (dj > dual_tol_ && val_[v] > lb_[v]) {
          score = dj;
          candidate_dir = -1.0;
        } else {
          continue;
        }
        if (bland) {
          if (enter < 0 || v < nb_[enter]) {
            enter = static_cast<int>(c);
            dir = candidate_dir;
          }
        } else if (score > best) {
          best = score;
          enter = static_cast<int>(c);
          dir = candidate_dir;
        }
      }
      if (enter < 0) return Outcome::kOptimal;

      // Ratio test.
      const int ev = nb_[enter];
      double t_min = ub_[ev] - lb_[ev];  // bound flip, may be inf
      int leave = -1;
      double leave_alpha = 0.0;
      for (int r = 0; r < r_; ++r) {
        const double alpha = -dir * at(r, enter);
        if (std::abs(alpha) <= kPivotTol) continue;
        const int bv = bs_[r];
        double limit;
        if (alpha < 0.0) {
          if (!std::isfinite(lb_[bv])) continue;
          limit = (val_[bv] - lb_[bv]) / -alpha;
        } else {
          if (!std::isfinite(ub_[bv])) continue;
          limit = (ub_[bv] - val_[bv]) / alpha;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < t_min - 1e-12) {
          take = true;
        } else if (limit <= t_min + 1e-12 && leave >= 0) {
          take = bland ? bv < bs_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          t_min = std::min(t_min, limit);
          leave = r;
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(t_min)) return Outcome::kUnbounded;
      ++iters_;

      if (t_min <= 1e-12) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      if (leave < 0) {
        // Entering variable runs to its opposite bound.
        val_[ev] = dir > 0.0 ? ub_[ev] : lb_[ev];
        refresh_basic_values();
        continue;
      }
      val_[ev] += dir * t_min;
      const int lv = bs_[leave];
      const double target = leave_alpha < 0.0 ? lb_[lv] : ub_[lv];
      pivot(leave, enter);
      val_[lv] = target;
      refresh_basic_values();
    }
  }

  // Exchanges basic bs_[p] with nonbasic nb_[q].
  void pivot(int p, int q) {
    const std::size_t k = nb_.size();
    const double piv = at(p, q);
    double* prow = &t_[static_cast<std::size_t>(p) * k];
    for (std::size_t c = 0; c < k; ++c) prow[c] /= piv;
    prow[q] = 1.0 / piv;
    beta_[p] /= piv;
    for (int r = 0; r < r_; ++r) {
      if (r == p) continue;
      double* row = &t_[static_cast<std::size_t>(r) * k];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < k; ++c) row[c] -= f * prow[c];
      row[q] = -f / piv;
      beta_[r] -= f * beta_[p];
    }
    std::swap(bs_[p], nb_[q]);
  }

  // Artificials leave the problem: basic ones are pivoted out where
  // possible, the rest are fixed at zero and their columns removed.
  void drop_artificials() {
    const int first_art = n_ + r_;
    for (int r = 0; r < r_; ++r) {
      if (bs_[r] < first_art) continue;
      int best_c = -1;
      double best_abs = 1e-7;
      for (std::size_t c = 0; c < nb_.size(); ++c) {
        if (nb_[c] >= first_art) continue;
        if (std::abs(at(r, static_cast<int>(c))) > best_abs) {
          best_abs = std::abs(at(r, static_cast<int>(c)));
          best_c = static_cast<int>(c);
        }
      }
      if (best_c >= 0) {
        const int art = bs_[r];
        pivot(r, best_c);
        val_[art] = 0.0;
      }
    }
    for (int j = first_art; j < total_; ++j) {
      lb_[j] = 0.0;
      ub_[j] = 0.0;
      val_[j] = 0.0;
    }
    std::vector<int> keep;
    for (std::size_t c = 0; c < nb_.size(); ++c)
      if (nb_[c] < first_art) keep.push_back(static_cast<int>(c));
    if (keep.size() != nb_.size()) {
      const std::size_t old_k = nb_.size();
      std::vector<double> t(static_cast<std::size_t>(r_) * keep.size());
      std::vector<int> nb(keep.size());
      for (std::size_t c = 0; c < keep.size(); ++c) nb[c] = nb_[keep[c]];
      for (int r = 0; r < r_; ++r)
        for (std::size_t c = 0; c < keep.size(); ++c)
          t[static_cast<std::size_t>(r) * keep.size() + c] = t_[static_cast<std::size_t>(r) * old_k + keep[c]];
      t_ = std::move(t);
      nb_ = std::move(nb);
    }
    refresh_basic_values();
  }

  std::string describe_stall() const {
    std::ostringstream msg;
    msg << "simplex stalled after " << iters_ << " iterations (rows=" << r_ << ", cols=" << n_ << "); basis:";
    for (int r = 0; r < r_; ++r) msg << ' ' << bs_[r];
    return msg.str();
  }

  const LpModel& model_;
  LpOptions opt_;
  int n_ = 0;
  int r_ = 0;
  int num_art_ = 0;
  int total_ = 0;
  int iters_ = 0;
  int max_iters_ = 0;
  double dual_tol_ = 1e-9;
  double rhs_scale_ = 0.0;
  std::vector<double> lb_, ub_, val_;
  std::vector<int> bs_, nb_;
  std::vector<double> t_, beta_, d_;
};

}  // namespace

LpSolution solve_lp(const LpModel& model, const LpOptions& options) {
  model.validate();
  return Simplex(model, options).run();
}

// --- Branch and bound ----------------------------------------------------------

namespace {

struct Node {
  double bound = 0.0;  // in maximization orientation
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> point;
  long order = 0;
};

struct NodeLess {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.order > b.order;  // older nodes first among equal bounds
  }
};

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options) {
  model.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const double orient = model.lp.sense == ObjSense::kMaximize ? 1.0 : -1.0;
  LpOptions lp_opt;
  lp_opt.tol = options.tol;

  MilpSolution out;
  LpModel work = model.lp;
  auto solve_node = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    work.lower = lo;
    work.upper = hi;
    return solve_lp(work, lp_opt);
  };

  LpSolution root = solve_node(model.lp.lower, model.lp.upper);
  if (root.status == LpStatus::kInfeasible) {
    out.status = MilpStatus::kInfeasible;
    return out;
  }
  if (root.status == LpStatus::kUnbounded) {
    out.status = MilpStatus::kUnbounded;
    return out;
  }

  std::priority_queue<Node, std::vector<Node>, NodeLess> open;
  long order = 0;
  open.push({orient * root.value, model.lp.lower, model.lp.upper, root.point, order++});

  double incumbent = -kInf;  // maximization orientation
  std::vector<double> incumbent_point;
  double pruned_bound = -kInf;
  auto gap_tol = [&](double ref) { return options.tol * (1.0 + std::abs(ref)); };
  auto timed_out = [&]() {
    return std::chrono::duration<double>(Clock::now() - start).count() > options.time_limit;
  };

  bool limit_hit = false;
  while (!open.empty()) {
    if (timed_out() || (options.max_nodes > 0 && out.node_count >= options.max_nodes)) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound <= incumbent + gap_tol(incumbent)) {
      pruned_bound = std::max(pruned_bound, node.bound);
      continue;
    }
    ++out.node_count;

    int branch_var = -1;
    double most = options.integrality_tol;
    for (int j : model.binaries) {
      const double v = node.point[j];
      const double frac = std::abs(v - std::round(v));
      if (frac > most) {
        most = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      if (node.bound > incumbent) {
        incumbent = node.bound;
        incumbent_point = node.point;
      }
    } else {
      for (double fixed : {0.0, 1.0}) {
        std::vector<double> lo = node.lower;
        std::vector<double> hi = node.upper;
        lo[branch_var] = fixed;
        hi[branch_var] = fixed;
        LpSolution child = solve_node(lo, hi);
        if (child.status != LpStatus::kOptimal) continue;
        const double b = orient * child.value;
        if (b <= incumbent + gap_tol(incumbent)) {
          pruned_bound = std::max(pruned_bound, b);
          continue;
        }
        open.push({b, std::move(lo), std::move(hi), std::move(child.point), order++});
      }
    }
    double global = std::max(incumbent, pruned_bound);
    if (!open.empty()) global = std::max(global, open.top().bound);
    if (!out.bound_history.empty()) global = std::min(global, orient * out.bound_history.back());
    out.bound_history.push_back(orient * global);
  }

  double bound = incumbent;
  if (!open.empty()) bound = std::max(bound, open.top().bound);
  bound = std::max(bound, pruned_bound);
  if (!out.bound_history.empty()) bound = std::min(bound, orient * out.bound_history.back());
  bound = std::max(bound, incumbent);

  if (incumbent_point.empty()) {
    out.status = limit_hit ? MilpStatus::kLimit : MilpStatus::kInfeasible;
    out.bound = orient * bound;
    return out;
  }
  for (int j : model.binaries) incumbent_point[j] = std::round(incumbent_point[j]);
  out.point = std::move(incumbent_point);
  out.value = model.lp.objective_constant;
  for (int j = 0; j < model.lp.num_vars(); ++j) out.value += model.lp.objective[j] * out.point[j];
  out.bound = orient * bound;
  if (orient * out.bound < orient * out.value) out.bound = out.value;
  out.status = limit_hit ? MilpStatus::kLimit : MilpStatus::kOptimal;
  return out;
}

}  // namespace capmax

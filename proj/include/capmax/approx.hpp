// Cross-fitting additive and multiplicative logit probabilities, choice
// simulation, maximum-likelihood estimation of a multiplicative model and
// the objective-gap experiment.
//
// One-term families (params a, b, c):
//   ARUM  exp(a x + b) / (exp(a x + b) + c)
//   MRUM  (a x + b) / ((a x + b) + c)
// Two-term families (params a1, b1, a2, b2, c) sum the two utilities.

#pragma once

#include <cstdint>
#include <vector>

#include "capmax/model.hpp"

namespace capmax {

struct CurvePoint {
  double x1 = 0.0;
  double x2 = 0.0;  // unused by one-term families
  double p = 0.0;
};

struct CurveSpec {
  Framework family = Framework::kArum;
  int terms = 1;
  std::vector<double> params;  // 3 or 5 entries
};

double curve_value(const CurveSpec& spec, double x1, double x2 = 0.0);

// Equispaced samples: n points on [lo, hi] (one term) or an n x n grid on
// [lo, hi]^2 (two terms).
std::vector<CurvePoint> sample_curve(const CurveSpec& spec, double lo, double hi, int n);

struct FitResult {
  CurveSpec fitted;
  double rmse = 0.0;
  double constant_rmse = 0.0;  // best constant predictor on the same data
  int starts = 0;
  int converged_starts = 0;
};

// Least squares by Levenberg-Marquardt from several starts: init, scaled
// copies of it and the best constant. Throws std::runtime_error carrying the
// best residual when no start produces a finite fit.
FitResult fit_curve(Framework target, const std::vector<CurvePoint>& data, const std::vector<double>& init);
FitResult fit_surface(Framework target, const std::vector<CurvePoint>& data, const std::vector<double>& init);

// Logit over m alternatives plus an outside option. ARUM weights are
// exp(a_i x_i + b_i), MRUM weights a_i x_i + b_i; the outside weight is
// u_comp.
struct ChoiceModel {
  Framework family = Framework::kArum;
  std::vector<double> a;
  std::vector<double> b;
  double u_comp = 1.0;

  int m() const { return static_cast<int>(a.size()); }
  // m + 1 entries, the last for the outside option.
  std::vector<double> probabilities(const std::vector<double>& x) const;
  // Share captured by the m alternatives.
  double captured(const std::vector<double>& x) const { return 1.0 - probabilities(x).back(); }
};

struct Observation {
  std::vector<double> x;
  int choice = 0;  // m means the outside option
};

// Contexts x ~ U[x_lo, x_hi]^m; the choice is drawn from the closed-form
// logit probabilities. Deterministic per seed.
std::vector<Observation> simulate_choices(const ChoiceModel& truth, int n_obs, std::uint64_t seed,
                                          double x_lo = 0.0, double x_hi = 10.0);

struct MleOptions {
  double floor = 1e-6;  // lower bound on every utility
  int max_iters = 5000;
  double tol = 1e-10;   // relative log-likelihood change
};

struct MleResult {
  ChoiceModel model;  // MRUM, outside utility 1
  double log_likelihood = 0.0;
  std::vector<double> history;  // log-likelihood after each accepted step
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // fewer than two distinct outcomes observed
};

// Projected ascent on sum log P(chosen) over a >= 0, b >= floor, which keeps
// every utility above floor for nonnegative contexts. init may be empty
// (a = 0.01, b = 1). Throws InvalidInput on negative contexts or a choice
// out of range.
MleResult mle_mrum(const std::vector<Observation>& observations, int m, const ChoiceModel& init = {},
                   const MleOptions& options = {});

struct GapConfig {
  int m = 20;
  int n_obs = 1000;
  int n_samples = 1000;
  std::uint64_t seed = 1;
  double u_comp = 60.0;            // outside utility of the ARUM truth
  Framework truth = Framework::kArum;
};

struct GapResult {
  double mean = 0.0;    // percent
  double std_error = 0.0;  // percent
  MleResult fit;
  ChoiceModel truth;
};

// Random truth (a ~ U[0.05, 0.2], b ~ U[-0.5, 0.5]; an MRUM truth uses
// b ~ U[0.5, 1.5]), simulated observations, MRUM fit, then
// |f_truth - f_fit| / f_truth over cost vectors x ~ U[0, 10]^m.
GapResult gap_experiment(const GapConfig& config);

// Sources used by the cross-fitting experiments.
CurveSpec reference_arum_curve();    // exp(0.1x - 0.3) / (exp(0.1x - 0.3) + 5)
CurveSpec reference_mrum_curve();    // (x + 3) / ((x + 3) + 30)
CurveSpec reference_arum_surface();  // exp terms (0.1, -0.3), (0.2, -0.3), c = 5
CurveSpec reference_mrum_surface();  // (x1 + 3) + (2 x2 + 1), c = 30

}  // namespace capmax

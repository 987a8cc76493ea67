#include "capmax/approx.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "capmax/rng.hpp"

namespace capmax {

namespace {

int param_count(int terms) { return terms == 1 ? 3 : 5; }

void check_spec(const CurveSpec& spec) {
  if (spec.terms != 1 && spec.terms != 2) throw InvalidInput("curve: terms must be 1 or 2");
  if (static_cast<int>(spec.params.size()) != param_count(spec.terms)) {
    throw InvalidInput("curve: expected " + std::to_string(param_count(spec.terms)) + " parameters");
  }
}

// Value and gradient with respect to the parameters.
double curve_eval(Framework family, int terms, const double* p, double x1, double x2, double* grad) {
  const double c = p[terms == 1 ? 2 : 4];
  double s = 0.0;
  double ds[2] = {0.0, 0.0};  // d s / d (a_k x_k + b_k)
  const double xs[2] = {x1, x2};
  for (int k = 0; k < terms; ++k) {
    const double lin = p[2 * k] * xs[k] + p[2 * k + 1];
    if (family == Framework::kArum) {
      ds[k] = std::exp(lin);
      s += ds[k];
    } else {
      ds[k] = 1.0;
      s += lin;
    }
  }
  const double den = s + c;
  if (grad) {
    const double dfs = c / (den * den);
    for (int k = 0; k < terms; ++k) {
      grad[2 * k] = dfs * ds[k] * xs[k];
      grad[2 * k + 1] = dfs * ds[k];
    }
    grad[terms == 1 ? 2 : 4] = -s / (den * den);
  }
  return s / den;
}

struct Residuals : Eigen::DenseFunctor<double> {
  Residuals(Framework family, int terms, const std::vector<CurvePoint>& data)
      : Eigen::DenseFunctor<double>(param_count(terms), static_cast<int>(data.size())),
        family(family),
        terms(terms),
        data(data) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (std::size_t k = 0; k < data.size(); ++k) {
      r[k] = curve_eval(family, terms, p.data(), data[k].x1, data[k].x2, nullptr) - data[k].p;
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    double g[5];
    for (std::size_t k = 0; k < data.size(); ++k) {
      curve_eval(family, terms, p.data(), data[k].x1, data[k].x2, g);
      for (int j = 0; j < inputs(); ++j) jac(k, j) = g[j];
    }
    return 0;
  }

  Framework family;
  int terms;
  const std::vector<CurvePoint>& data;
};

double rmse_of(const Residuals& f, const Eigen::VectorXd& p) {
  Eigen::VectorXd r(f.values());
  f(p, r);
  const double v = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

std::vector<double> constant_start(Framework family, int terms, double mean) {
  const double odds = (1.0 - mean) / mean;
  if (terms == 1) {
    return family == Framework::kArum ? std::vector<double>{0.0, 0.0, odds} : std::vector<double>{0.0, 1.0, odds};
  }
  return family == Framework::kArum ? std::vector<double>{0.0, 0.0, 0.0, 0.0, 2.0 * odds}
                                    : std::vector<double>{0.0, 0.5, 0.0, 0.5, odds};
}

FitResult fit_family(Framework target, int terms, const std::vector<CurvePoint>& data,
                     const std::vector<double>& init) {
  const int np = param_count(terms);
  if (static_cast<int>(init.size()) != np) {
    throw InvalidInput("fit: expected " + std::to_string(np) + " initial parameters");
  }
  if (static_cast<int>(data.size()) < np) throw InvalidInput("fit: fewer data points than parameters");
  double mean = 0.0;
  for (const auto& d : data) {
    if (!(d.p > 0.0 && d.p < 1.0)) throw InvalidInput("fit: probabilities must lie in (0, 1)");
    mean += d.p;
  }
  mean /= static_cast<double>(data.size());

  FitResult out;
  double sq = 0.0;
  for (const auto& d : data) sq += (d.p - mean) * (d.p - mean);
  out.constant_rmse = std::sqrt(sq / static_cast<double>(data.size()));

  std::vector<std::vector<double>> starts{init};
  for (double scale : {0.5, 2.0}) {
    starts.push_back(init);
    for (double& v : starts.back()) v *= scale;
  }
  starts.push_back(constant_start(target, terms, mean));

  Residuals f(target, terms, data);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  for (const auto& s : starts) {
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(s.data(), np);
    Eigen::LevenbergMarquardt<Residuals> lm(f);
    lm.setMaxfev(20000);
    const auto status = lm.minimize(p);
    ++out.starts;
    const double e = rmse_of(f, p);
    const bool ok = std::isfinite(e) && status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                    status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
    if (ok) ++out.converged_starts;
    if (e < best) {
      best = e;
      best_p = p;
    }
  }
  if (!std::isfinite(best)) {
    std::ostringstream msg;
    msg << "fit: no start produced a finite residual (" << out.starts << " starts)";
    throw std::runtime_error(msg.str());
  }
  out.fitted.family = target;
  out.fitted.terms = terms;
  out.fitted.params.assign(best_p.data(), best_p.data() + np);
  out.rmse = best;
  return out;
}

}  // namespace

double curve_value(const CurveSpec& spec, double x1, double x2) {
  check_spec(spec);
  return curve_eval(spec.family, spec.terms, spec.params.data(), x1, x2, nullptr);
}

std::vector<CurvePoint> sample_curve(const CurveSpec& spec, double lo, double hi, int n) {
  check_spec(spec);
  if (n < 2 || !(hi > lo)) throw InvalidInput("sample_curve: need n >= 2 and hi > lo");
  std::vector<double> axis(n);
  for (int k = 0; k < n; ++k) axis[k] = lo + (hi - lo) * k / (n - 1);
  std::vector<CurvePoint> out;
  if (spec.terms == 1) {
    for (double x : axis) out.push_back({x, 0.0, curve_value(spec, x)});
  } else {
    for (double x2 : axis) {
      for (double x1 : axis) out.push_back({x1, x2, curve_value(spec, x1, x2)});
    }
  }
  return out;
}

FitResult fit_curve(Framework target, const std::vector<CurvePoint>& data, const std::vector<double>& init) {
  return fit_family(target, 1, data, init);
}

FitResult fit_surface(Framework target, const std::vector<CurvePoint>& data, const std::vector<double>& init) {
  return fit_family(target, 2, data, init);
}

std::vector<double> ChoiceModel::probabilities(const std::vector<double>& x) const {
  const int n = m();
  if (static_cast<int>(x.size()) != n || static_cast<int>(b.size()) != n) {
    throw InvalidInput("choice model: dimension mismatch");
  }
  std::vector<double> w(n + 1);
  double total = u_comp;
  for (int i = 0; i < n; ++i) {
    const double lin = a[i] * x[i] + b[i];
    w[i] = family == Framework::kArum ? std::exp(lin) : lin;
    total += w[i];
  }
  w[n] = u_comp;
  for (double& v : w) v /= total;
  return w;
}

std::vector<Observation> simulate_choices(const ChoiceModel& truth, int n_obs, std::uint64_t seed, double x_lo,
                                          double x_hi) {
  if (n_obs < 1) throw InvalidInput("simulate_choices: n_obs must be at least 1");
  if (truth.m() < 1 || truth.b.size() != truth.a.size() || !(truth.u_comp > 0.0)) {
    throw InvalidInput("simulate_choices: malformed model");
  }
  SplitMix64 rng(seed);
  std::vector<Observation> out(n_obs);
  for (auto& obs : out) {
    obs.x.resize(truth.m());
    for (double& v : obs.x) v = rng.uniform(x_lo, x_hi);
    const std::vector<double> p = truth.probabilities(obs.x);
    for (double v : p) {
      if (!(v >= 0.0)) throw InvalidInput("simulate_choices: negative utility in the model");
    }
    obs.choice = static_cast<int>(rng.categorical(p, 1.0));
  }
  return out;
}

namespace {

struct MleData {
  const std::vector<Observation>& obs;
  int m;
};

// Log-likelihood with outside utility 1; theta = (a, b).
double mle_value(const MleData& d, const std::vector<double>& th, std::vector<double>* grad) {
  const int m = d.m;
  if (grad) grad->assign(2 * m, 0.0);
  double ll = 0.0;
  for (const auto& o : d.obs) {
    double den = 1.0;
    for (int i = 0; i < m; ++i) den += th[i] * o.x[i] + th[m + i];
    ll -= std::log(den);
    if (o.choice < m) {
      const int c = o.choice;
      const double v = th[c] * o.x[c] + th[m + c];
      ll += std::log(v);
      if (grad) {
        (*grad)[c] += o.x[c] / v;
        (*grad)[m + c] += 1.0 / v;
      }
    }
    if (grad) {
      for (int i = 0; i < m; ++i) {
        (*grad)[i] -= o.x[i] / den;
        (*grad)[m + i] -= 1.0 / den;
      }
    }
  }
  return ll;
}

}  // namespace

MleResult mle_mrum(const std::vector<Observation>& observations, int m, const ChoiceModel& init,
                   const MleOptions& options) {
  if (m < 1) throw InvalidInput("mle: m must be at least 1");
  if (observations.empty()) throw InvalidInput("mle: no observations");
  std::vector<int> seen(m + 1, 0);
  for (const auto& o : observations) {
    if (static_cast<int>(o.x.size()) != m) throw InvalidInput("mle: context has wrong length");
    if (o.choice < 0 || o.choice > m) throw InvalidInput("mle: choice out of range");
    for (double v : o.x) {
      if (!(v >= 0.0)) throw InvalidInput("mle: contexts must be nonnegative to keep utilities positive");
    }
    seen[o.choice] = 1;
  }

  std::vector<double> th(2 * m);
  for (int i = 0; i < m; ++i) {
    th[i] = init.a.empty() ? 0.01 : init.a.at(i);
    th[m + i] = init.b.empty() ? 1.0 : init.b.at(i);
  }
  auto project = [&](std::vector<double>& v) {
    for (int i = 0; i < m; ++i) {
      v[i] = std::max(v[i], 0.0);
      v[m + i] = std::max(v[m + i], options.floor);
    }
  };
  project(th);

  MleResult out;
  out.model.family = Framework::kMrum;
  out.model.u_comp = 1.0;
  const MleData data{observations, m};
  std::vector<double> g;
  double ll = mle_value(data, th, &g);
  out.history.push_back(ll);
  out.degenerate = std::count(seen.begin(), seen.end(), 1) < 2;

  if (!out.degenerate) {
    std::vector<double> th_prev, g_prev, next(2 * m), g_next;
    double step = 1e-4;
    for (int iter = 0; iter < options.max_iters; ++iter) {
      if (!th_prev.empty()) {
        double ss = 0.0, sy = 0.0;
        for (int k = 0; k < 2 * m; ++k) {
          const double s = th[k] - th_prev[k];
          const double y = g[k] - g_prev[k];
          ss += s * s;
          sy += s * y;
        }
        // Ascent, so the curvature s.y is negative.
        if (sy < 0.0) step = std::clamp(ss / -sy, 1e-12, 1e6);
      }
      bool accepted = false;
      double ll_next = ll;
      for (int tries = 0; tries < 60; ++tries) {
        double inc = 0.0;
        for (int k = 0; k < 2 * m; ++k) next[k] = th[k] + step * g[k];
        project(next);
        for (int k = 0; k < 2 * m; ++k) inc += g[k] * (next[k] - th[k]);
        ll_next = mle_value(data, next, &g_next);
        if (std::isfinite(ll_next) && ll_next >= ll + 1e-4 * inc) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++out.iterations;
      if (!accepted) {
        out.converged = true;
        break;
      }
      th_prev = th;
      g_prev = g;
      th = next;
      g = g_next;
      const double change = (ll_next - ll) / (1.0 + std::abs(ll));
      ll = ll_next;
      out.history.push_back(ll);
      if (change < options.tol) {
        out.converged = true;
        break;
      }
    }
  }
  out.log_likelihood = ll;
  out.model.a.assign(th.begin(), th.begin() + m);
  out.model.b.assign(th.begin() + m, th.end());
  return out;
}

GapResult gap_experiment(const GapConfig& config) {
  if (config.m < 2) throw InvalidInput("gap experiment: m must be at least 2");
  if (config.n_obs < 1 || config.n_samples < 2) throw InvalidInput("gap experiment: need observations and >= 2 samples");
  SplitMix64 rng(config.seed);
  GapResult out;
  ChoiceModel& truth = out.truth;
  truth.family = config.truth;
  truth.u_comp = config.u_comp;
  for (int i = 0; i < config.m; ++i) {
    truth.a.push_back(rng.uniform(0.05, 0.2));
    truth.b.push_back(config.truth == Framework::kArum ? rng.uniform(-0.5, 0.5) : rng.uniform(0.5, 1.5));
  }
  const auto obs = simulate_choices(truth, config.n_obs, rng.next());

  ChoiceModel init;
  init.a.assign(config.m, 0.01);
  init.b.assign(config.m, 1.0 / config.u_comp);
  out.fit = mle_mrum(obs, config.m, init);

  SplitMix64 draw(rng.next());
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> x(config.m);
  for (int s = 0; s < config.n_samples; ++s) {
    for (double& v : x) v = draw.uniform(0.0, 10.0);
    const double f_true = truth.captured(x);
    const double f_fit = out.fit.model.captured(x);
    const double gap = 100.0 * std::abs(f_true - f_fit) / f_true;
    sum += gap;
    sum_sq += gap * gap;
  }
  const double n = config.n_samples;
  out.mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

CurveSpec reference_arum_curve() { return {Framework::kArum, 1, {0.1, -0.3, 5.0}}; }
CurveSpec reference_mrum_curve() { return {Framework::kMrum, 1, {1.0, 3.0, 30.0}}; }
CurveSpec reference_arum_surface() { return {Framework::kArum, 2, {0.1, -0.3, 0.2, -0.3, 5.0}}; }
CurveSpec reference_mrum_surface() { return {Framework::kMrum, 2, {1.0, 3.0, 2.0, 1.0, 30.0}}; }

}  // namespace capmax

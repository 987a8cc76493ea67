#include "capmax/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "capmax/approx.hpp"
#include "capmax/conic.hpp"
#include "capmax/costopt.hpp"
#include "capmax/instgen.hpp"
#include "capmax/localsearch.hpp"
#include "capmax/moa.hpp"
#include "capmax/oracle.hpp"

namespace capmax {

namespace {

using nlohmann::json;

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

json header(const std::string& command, const Instance* instance, json config) {
  json h;
  h["tool"] = "capmax";
  h["version"] = kVersion;
  h["command"] = command;
  h["instance_hash"] = instance ? json(instance_hash(*instance)) : json(nullptr);
  h["config"] = std::move(config);
  return h;
}

std::vector<std::uint8_t> open_mask(const Instance& inst, const std::vector<int>& open, bool default_all) {
  std::vector<std::uint8_t> y(inst.m, default_all && open.empty() ? 1 : 0);
  for (int i : open) {
    if (i < 0 || i >= inst.m) throw InvalidInput("--open: index " + std::to_string(i) + " out of range");
    y[i] = 1;
  }
  return y;
}

json multipliers_json(const KktMultipliers& mu) {
  return {{"lambda", mu.lambda},
          {"gamma_u", mu.gamma_u},
          {"gamma_l", mu.gamma_l},
          {"case", to_string(mu.kkt_case)},
          {"budget_perturbation", mu.budget_perturbation},
          {"lambda_perturbed", mu.lambda_perturbed}};
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += fmt::format("{}{:.17g}", k ? ";" : "", v[k]);
  return s;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  GenSpec spec;
  std::string regime = "low";
  std::string output;
};

int do_generate(const GenerateArgs& args, std::ostream& out) {
  GenSpec spec = args.spec;
  spec.q_regime = demand_regime_from_string(args.regime);
  const Instance inst = generate(spec);
  json doc = instance_to_json(inst);
  doc["generator"] = generator_metadata(spec);
  doc["instance_hash"] = instance_hash(inst);
  emit(args.output, doc.dump(2) + "\n", out);
  return kExitOk;
}

// --- solve-cost -------------------------------------------------------------

struct SolveCostArgs {
  std::string instance;
  std::vector<int> open;
  double tol = 1e-8;
  std::string output;
};

int do_solve_cost(const SolveCostArgs& args, std::ostream& out) {
  const Instance inst = read_instance_file(args.instance);
  const auto mask = open_mask(inst, args.open, false);
  CostOptions opt;
  opt.tol = args.tol;
  const CostResult r = solve_cost_mrum(inst, std::vector<double>(mask.begin(), mask.end()), opt);
  json doc;
  doc["header"] = header("solve-cost", &inst, {{"open", args.open}, {"tol", args.tol}});
  doc["y"] = mask;
  doc["x"] = r.x_star;
  doc["value"] = r.value;
  doc["multipliers"] = multipliers_json(r.multipliers);
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  doc["pg_norm"] = r.pg_norm;
  emit(args.output, doc.dump(2) + "\n", out);
  return r.converged ? kExitOk : kExitLimit;
}

// --- solve-joint ------------------------------------------------------------

struct SolveJointArgs {
  std::string instance;
  std::string method = "moa";
  int cuts = 5;
  double tau = -1.0;
  double time_limit = kInf;
  int max_iters = 1000;
  int top_k = 5;
  double grid_step = 0.0;
  std::string output;
  std::string log;
  bool reproducible = false;
};

int do_solve_joint(const SolveJointArgs& args, std::ostream& out) {
  const Instance inst = read_instance_file(args.instance);
  json config{{"method", args.method}, {"time_limit", std::isfinite(args.time_limit) ? json(args.time_limit) : json(nullptr)},
              {"max_iters", args.max_iters}};
  JointResult result;
  json extra = json::object();
  if (args.method == "moa") {
    MoaConfig cfg;
    cfg.groups = args.cuts;
    cfg.tau = args.tau;
    cfg.time_limit = args.time_limit;
    cfg.max_iters = args.max_iters;
    MoaState st;
    result = solve_moa(inst, cfg, &st);
    config["cuts"] = args.cuts;
    config["tau"] = st.tau;
    extra["groups"] = st.groups.size();
    extra["cuts"] = st.cuts.size();
  } else if (args.method == "ls") {
    LocalSearchParams p;
    p.max_iters = args.max_iters;
    p.time_limit = args.time_limit;
    p.top_k = args.top_k;
    const LocalSearchResult r = local_search(inst, p);
    result = r.joint;
    config["top_k"] = args.top_k;
    extra["greedy_value"] = r.greedy.value;
    extra["greedy_y"] = r.greedy.y;
  } else {
    BruteForceOptions opt;
    opt.cross_check_step = args.grid_step;
    result = brute_force_joint(inst, opt);
    config["grid_step"] = args.grid_step;
  }
  config["reproducible"] = args.reproducible;
  json doc;
  doc["header"] = header("solve-joint", &inst, config);
  doc["result"] = joint_result_to_json(result, args.reproducible);
  for (auto it = extra.begin(); it != extra.end(); ++it) doc["result"][it.key()] = it.value();
  emit(args.output, doc.dump(2) + "\n", out);
  if (!args.log.empty()) emit(args.log, iteration_log_csv(result.log, args.reproducible), out);
  return result.status == JointStatus::kLimit ? kExitLimit : kExitOk;
}

// --- export-conic -----------------------------------------------------------

struct ExportArgs {
  std::string instance;
  std::string which = "fc";
  std::vector<int> open;
  std::string output;
};

int do_export(const ExportArgs& args, std::ostream& out) {
  const Instance inst = read_instance_file(args.instance);
  const ConicModel model = args.which == "cp" ? build_cp_conic(inst, open_mask(inst, args.open, true))
                                              : build_fc_conic(inst);
  emit(args.output, export_conic(model), out);
  return kExitOk;
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string experiment = "curve1d";
  double lo = 0.0;
  double hi = -1.0;  // 10 for curves, 5 for surfaces
  int points = -1;   // 200 for curves, 30 per axis for surfaces
  std::vector<int> ms{20, 50, 100, 200};
  int obs = 1000;
  int samples = 1000;
  std::uint64_t seed = 1;
  double u_comp = 60.0;
  std::string output;
};

constexpr const char* kFitHeader = "experiment,source,target,m,params,rmse,constant_rmse,gap_mean,gap_stderr,seed\n";

std::string fit_row(const std::string& experiment, const CurveSpec& source, const FitResult& r) {
  return fmt::format("{},{},{},,{},{:.17g},{:.17g},,,\n", experiment, to_string(source.family),
                     to_string(r.fitted.family), join(r.fitted.params), r.rmse, r.constant_rmse);
}

int do_fit(const FitArgs& args, std::ostream& out) {
  std::string csv = kFitHeader;
  if (args.experiment == "curve1d" || args.experiment == "surface3d") {
    const bool curve = args.experiment == "curve1d";
    const double hi = args.hi > 0.0 ? args.hi : (curve ? 10.0 : 5.0);
    const int n = args.points > 0 ? args.points : (curve ? 200 : 30);
    const CurveSpec src_a = curve ? reference_arum_curve() : reference_arum_surface();
    const CurveSpec src_m = curve ? reference_mrum_curve() : reference_mrum_surface();
    const auto data_a = sample_curve(src_a, args.lo, hi, n);
    const auto data_m = sample_curve(src_m, args.lo, hi, n);
    if (curve) {
      csv += fit_row(args.experiment, src_a, fit_curve(Framework::kMrum, data_a, {0.14, 0.82, 6.02}));
      csv += fit_row(args.experiment, src_m, fit_curve(Framework::kArum, data_m, {0.14, 0.1, 8.67}));
    } else {
      csv += fit_row(args.experiment, src_a, fit_surface(Framework::kMrum, data_a, {0.15, -0.24, 0.25, -0.24, 6.25}));
      csv += fit_row(args.experiment, src_m, fit_surface(Framework::kArum, data_m, {0.16, -0.36, 0.13, 0.71, 8.8}));
    }
  } else {
    for (int m : args.ms) {
      GapConfig cfg;
      cfg.m = m;
      cfg.n_obs = args.obs;
      cfg.n_samples = args.samples;
      cfg.seed = args.seed;
      cfg.u_comp = args.u_comp;
      const GapResult r = gap_experiment(cfg);
      std::vector<double> params = r.fit.model.a;
      params.insert(params.end(), r.fit.model.b.begin(), r.fit.model.b.end());
      csv += fmt::format("gap,arum,mrum,{},{},,,{:.17g},{:.17g},{}\n", m, join(params), r.mean, r.std_error, args.seed);
    }
  }
  emit(args.output, csv, out);
  return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
  std::vector<int> ms{6, 8};
  std::vector<int> zones{4};
  int count = 5;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"moa", "ls", "oracle"};
  double time_limit = 60.0;
  int threads = 1;
  bool reproducible = false;
  std::string output;
};

struct BenchCell {
  double value = 0.0;
  double seconds = 0.0;
  bool solved = false;
  bool ran = false;
};

int do_bench(const BenchArgs& args, std::ostream& out) {
  if (args.count < 1) throw InvalidInput("--count must be at least 1");
  for (const auto& name : args.methods) {
    if (name != "moa" && name != "ls" && name != "oracle") throw InvalidInput("unknown method '" + name + "'");
  }
  struct Job {
    int m, zones, group;
    Instance inst;
  };
  std::vector<Job> jobs;
  int group = 0;
  std::uint64_t seed = args.seed;
  for (int m : args.ms) {
    for (int z : args.zones) {
      for (int k = 0; k < args.count; ++k) {
        GenSpec spec;
        spec.m = m;
        spec.zones = z;
        spec.seed = seed++;
        jobs.push_back({m, z, group, generate(spec)});
      }
      ++group;
    }
  }
  const std::size_t nm = args.methods.size();
  std::vector<BenchCell> cells(jobs.size() * nm);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next++) < jobs.size();) {
      const Instance& inst = jobs[j].inst;
      for (std::size_t k = 0; k < nm; ++k) {
        BenchCell& c = cells[j * nm + k];
        const std::string& name = args.methods[k];
        JointResult r;
        if (name == "moa") {
          MoaConfig cfg;
          cfg.time_limit = args.time_limit;
          r = solve_moa(inst, cfg);
        } else if (name == "ls") {
          LocalSearchParams p;
          p.time_limit = args.time_limit;
          r = local_search(inst, p).joint;
        } else {
          if (inst.m > kBruteForceMaxM) continue;
          r = brute_force_joint(inst);
        }
        c.ran = true;
        c.value = r.value;
        c.seconds = r.seconds;
        c.solved = r.status != JointStatus::kLimit;
      }
    }
  };
  const int nthreads = std::max(1, args.threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = "m,zones,method,instances,solved,best,mean_seconds\n";
  for (int g = 0; g < group; ++g) {
    std::vector<int> solved(nm, 0), best(nm, 0), ran(nm, 0);
    std::vector<double> secs(nm, 0.0);
    int m = 0, z = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].group != g) continue;
      m = jobs[j].m;
      z = jobs[j].zones;
      double top = -kInf;
      for (std::size_t k = 0; k < nm; ++k) {
        if (cells[j * nm + k].ran) top = std::max(top, cells[j * nm + k].value);
      }
      for (std::size_t k = 0; k < nm; ++k) {
        const BenchCell& c = cells[j * nm + k];
        if (!c.ran) continue;
        ++ran[k];
        solved[k] += c.solved;
        best[k] += c.value >= top - 1e-6 * (1.0 + std::abs(top));
        secs[k] += c.seconds;
      }
    }
    for (std::size_t k = 0; k < nm; ++k) {
      if (!ran[k]) continue;
      csv += fmt::format("{},{},{},{},{},{},{:.6f}\n", m, z, args.methods[k], ran[k], solved[k], best[k],
                         args.reproducible ? 0.0 : secs[k] / ran[k]);
    }
  }
  emit(args.output, csv, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint facility location and cost optimization under logit choice models", "capmax"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a seeded synthetic instance");
  g->add_option("--m", gen.spec.m, "Candidate locations")->check(CLI::PositiveNumber);
  g->add_option("--zones", gen.spec.zones, "Customer zones")->check(CLI::PositiveNumber);
  g->add_option("--c-frac", gen.spec.c_frac, "Budget C = c_frac * m");
  g->add_option("--k-frac", gen.spec.k_frac, "Cap K = round(k_frac * m)");
  g->add_option("--q-regime", gen.regime, "Zone demand regime")->check(CLI::IsMember({"low", "high"}));
  g->add_option("--u-comp", gen.spec.u_comp, "Competitor utility");
  g->add_option("--seed", gen.spec.seed, "Generator seed");
  g->add_option("-o,--output", gen.output, "Output file (stdout if omitted)");

  SolveCostArgs sc;
  auto* c = app.add_subcommand("solve-cost", "Optimal costs for a fixed open set");
  c->add_option("instance", sc.instance, "Instance file")->required();
  c->add_option("--open", sc.open, "Open locations, comma separated")->delimiter(',');
  c->add_option("--tol", sc.tol, "Projected-gradient tolerance");
  c->add_option("-o,--output", sc.output, "Result file");

  SolveJointArgs sj;
  auto* j = app.add_subcommand("solve-joint", "Joint location and cost problem");
  j->add_option("instance", sj.instance, "Instance file")->required();
  j->add_option("--method", sj.method, "Solver")->check(CLI::IsMember({"moa", "ls", "oracle"}));
  j->add_option("--cuts", sj.cuts, "Zone groups T for moa")->check(CLI::PositiveNumber);
  j->add_option("--tau", sj.tau, "Stopping threshold for moa (default 1e-6 (1 + sum q))");
  j->add_option("--time-limit", sj.time_limit, "Seconds");
  j->add_option("--max-iters", sj.max_iters, "Master iterations (moa) or search rounds (ls)");
  j->add_option("--top-k", sj.top_k, "Flips tried per gradient step (ls)")->check(CLI::PositiveNumber);
  j->add_option("--grid-step", sj.grid_step, "Cross-check every open set with the grid oracle (oracle)");
  j->add_option("-o,--output", sj.output, "Result file");
  j->add_option("--log", sj.log, "Iteration log CSV");
  j->add_flag("--reproducible", sj.reproducible, "Write timing fields as 0");

  ExportArgs ex;
  auto* e = app.add_subcommand("export-conic", "Write the CP or FC conic model");
  e->add_option("instance", ex.instance, "Instance file")->required();
  e->add_option("--which", ex.which, "Model")->check(CLI::IsMember({"cp", "fc"}));
  e->add_option("--open", ex.open, "Open set for cp (all sites if omitted)")->delimiter(',');
  e->add_option("-o,--output", ex.output, "Output file");

  FitArgs fa;
  auto* f = app.add_subcommand("fit", "Cross-fitting and objective-gap experiments");
  f->add_option("--experiment", fa.experiment, "Experiment")->check(CLI::IsMember({"curve1d", "surface3d", "gap"}));
  f->add_option("--lo", fa.lo, "Lower end of the cost range");
  f->add_option("--hi", fa.hi, "Upper end of the cost range");
  f->add_option("--points", fa.points, "Samples per axis");
  f->add_option("--m", fa.ms, "Alternatives for gap, comma separated")->delimiter(',');
  f->add_option("--obs", fa.obs, "Simulated observations");
  f->add_option("--samples", fa.samples, "Cost vectors per gap estimate");
  f->add_option("--seed", fa.seed, "Seed");
  f->add_option("--u-comp", fa.u_comp, "Outside utility of the additive truth");
  f->add_option("-o,--output", fa.output, "CSV file");

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "Seeded instance battery, one CSV row per size and method");
  b->add_option("--m", bn.ms, "Location counts, comma separated")->delimiter(',');
  b->add_option("--zones", bn.zones, "Zone counts, comma separated")->delimiter(',');
  b->add_option("--count", bn.count, "Instances per size");
  b->add_option("--seed", bn.seed, "First seed");
  b->add_option("--methods", bn.methods, "Methods, comma separated")->delimiter(',');
  b->add_option("--time-limit", bn.time_limit, "Seconds per solve");
  b->add_option("--threads", bn.threads, "Worker threads");
  b->add_flag("--reproducible", bn.reproducible, "Write timing fields as 0");
  b->add_option("-o,--output", bn.output, "CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return do_generate(gen, out);
    if (*c) return do_solve_cost(sc, out);
    if (*j) return do_solve_joint(sj, out);
    if (*e) return do_export(ex, out);
    if (*f) return do_fit(fa, out);
    if (*b) return do_bench(bn, out);
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInput;
  } catch (const Infeasible& ex) {
    err << "infeasible: " << ex.what() << "\n";
    return kExitInput;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace capmax

#include "capmax/instgen.hpp"

#include <algorithm>
#include <cmath>

#include "capmax/rng.hpp"

namespace capmax {

std::string to_string(DemandRegime regime) { return regime == DemandRegime::kLow ? "low" : "high"; }

DemandRegime demand_regime_from_string(const std::string& name) {
  if (name == "low") return DemandRegime::kLow;
  if (name == "high") return DemandRegime::kHigh;
  throw InvalidInput("unknown demand regime '" + name + "' (expected low|high)");
}

namespace {

void check_interval(const Interval& r, const char* what, double min_lo) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi && r.lo >= min_lo)) {
    throw InvalidInput(std::string("generator: bad interval for ") + what);
  }
}

int cardinality_cap(const GenSpec& spec) {
  return std::max(1, static_cast<int>(std::lround(spec.k_frac * spec.m)));
}

}  // namespace

Instance generate(const GenSpec& spec) {
  if (spec.m < 1 || spec.zones < 1) throw InvalidInput("generator: m and zones must be positive");
  if (!(spec.c_frac > 0.0) || !(spec.k_frac > 0.0)) throw InvalidInput("generator: c_frac and k_frac must be positive");
  if (!(spec.u_comp > 0.0)) throw InvalidInput("generator: u_comp must be positive");
  check_interval(spec.a_range, "a", 0.0);
  check_interval(spec.b_range, "b", 0.0);
  check_interval(spec.lower_frac, "lower bounds", 0.0);
  check_interval(spec.width_frac, "bound widths", 0.0);

  Instance inst;
  inst.m = spec.m;
  inst.zones = spec.zones;
  inst.budget = spec.c_frac * spec.m;
  inst.cap = cardinality_cap(spec);
  const double unit = inst.budget / inst.cap;
  if (spec.lower_frac.lo * unit > inst.budget) {
    throw Infeasible("generator: every lower bound exceeds the budget");
  }

  SplitMix64 rng(spec.seed);
  const Interval q_range = spec.q_regime == DemandRegime::kLow ? Interval{1.0, 10.0} : Interval{90.0, 100.0};
  const auto cells = static_cast<std::size_t>(spec.zones) * spec.m;
  inst.q.resize(spec.zones);
  for (auto& v : inst.q) v = rng.uniform(q_range.lo, q_range.hi);
  inst.a.resize(cells);
  for (auto& v : inst.a) v = rng.uniform(spec.a_range.lo, spec.a_range.hi);
  inst.b.resize(cells);
  for (auto& v : inst.b) v = rng.uniform(spec.b_range.lo, spec.b_range.hi);
  inst.u_comp.assign(spec.zones, spec.u_comp);
  inst.lower.resize(spec.m);
  inst.upper.resize(spec.m);
  for (int i = 0; i < spec.m; ++i) {
    inst.lower[i] = rng.uniform(spec.lower_frac.lo, spec.lower_frac.hi) * unit;
    inst.upper[i] = inst.lower[i] + rng.uniform(spec.width_frac.lo, spec.width_frac.hi) * unit;
  }
  if (*std::min_element(inst.lower.begin(), inst.lower.end()) > inst.budget) {
    throw Infeasible("generator: no location fits the budget");
  }
  inst.validate();
  return inst;
}

nlohmann::json generator_metadata(const GenSpec& spec) {
  nlohmann::json meta;
  meta["rng"] = "splitmix64";
  meta["seed"] = spec.seed;
  meta["c_frac"] = spec.c_frac;
  meta["k_frac"] = spec.k_frac;
  meta["q_regime"] = to_string(spec.q_regime);
  meta["a_range"] = {spec.a_range.lo, spec.a_range.hi};
  meta["b_range"] = {spec.b_range.lo, spec.b_range.hi};
  meta["bound_policy"] = {{"lower_frac", {spec.lower_frac.lo, spec.lower_frac.hi}},
                          {"width_frac", {spec.width_frac.lo, spec.width_frac.hi}},
                          {"unit", "C/K"}};
  meta["u_comp"] = spec.u_comp;
  return meta;
}

}  // namespace capmax

#include "capmax/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace capmax {

std::string to_string(Framework framework) {
  return framework == Framework::kArum ? "arum" : "mrum";
}

Framework framework_from_string(const std::string& name) {
  if (name == "arum" || name == "ARUM") return Framework::kArum;
  if (name == "mrum" || name == "MRUM") return Framework::kMrum;
  throw InvalidInput("unknown framework '" + name + "'");
}

double Instance::total_demand() const { return std::accumulate(q.begin(), q.end(), 0.0); }

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

bool all_finite(const std::vector<double>& v) {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

}  // namespace

void Instance::validate(bool allow_negative_b) const {
  require(m >= 1, "instance: m must be >= 1");
  require(zones >= 1, "instance: zones must be >= 1");
  const auto cells = static_cast<std::size_t>(zones) * m;
  require(q.size() == static_cast<std::size_t>(zones), "instance: q has wrong length");
  require(u_comp.size() == static_cast<std::size_t>(zones), "instance: u_comp has wrong length");
  require(a.size() == cells, "instance: a has wrong size");
  require(b.size() == cells, "instance: b has wrong size");
  require(lower.size() == static_cast<std::size_t>(m), "instance: lower has wrong length");
  require(upper.size() == static_cast<std::size_t>(m), "instance: upper has wrong length");
  require(all_finite(q) && all_finite(a) && all_finite(b) && all_finite(u_comp) &&
              all_finite(lower) && all_finite(upper) && std::isfinite(budget),
          "instance: non-finite value");
  for (int n = 0; n < zones; ++n) {
    require(q[n] > 0.0, "instance: q must be positive (zone " + std::to_string(n) + ")");
    require(u_comp[n] > 0.0, "instance: u_comp must be positive (zone " + std::to_string(n) + ")");
  }
  for (std::size_t k = 0; k < cells; ++k) {
    require(a[k] >= 0.0, "instance: a must be nonnegative");
    require(allow_negative_b || b[k] >= 0.0, "instance: b must be nonnegative");
  }
  for (int i = 0; i < m; ++i) {
    require(lower[i] >= 0.0 && lower[i] <= upper[i],
            "instance: need 0 <= L_i <= U_i (location " + std::to_string(i) + ")");
  }
  require(budget > 0.0, "instance: budget must be positive");
  require(cap >= 0, "instance: cap must be nonnegative");
  const double min_lower = *std::min_element(lower.begin(), lower.end());
  require(min_lower <= budget, "instance: no location fits the budget (min L_i > C)");
}

int Solution::open_count() const {
  int count = 0;
  for (auto v : y) count += v != 0;
  return count;
}

std::vector<Violation> check_feasible(const Instance& instance, const Solution& solution, double tol) {
  const int m = instance.m;
  if (solution.y.size() != static_cast<std::size_t>(m) || solution.x.size() != static_cast<std::size_t>(m)) {
    throw InvalidInput("solution dimension does not match instance (m=" + std::to_string(m) + ")");
  }
  std::vector<Violation> out;
  auto add = [&out](std::string c, int i, double amount, std::string msg) {
    out.push_back({std::move(c), i, amount, std::move(msg)});
  };
  double spent = 0.0;
  int opened = 0;
  for (int i = 0; i < m; ++i) {
    const double x = solution.x[i];
    const auto y = solution.y[i];
    const std::string at = " at location " + std::to_string(i);
    if (y > 1) {
      add("binary", i, static_cast<double>(y), "non-binary open flag" + at);
      continue;
    }
    if (!std::isfinite(x)) {
      add("nonnegative", i, INFINITY, "non-finite cost" + at);
      continue;
    }
    if (x < -tol) add("nonnegative", i, -x, "negative cost" + at);
    if (y == 0) {
      if (std::abs(x) > tol) add("closed-cost", i, std::abs(x), "cost positive at closed location " + std::to_string(i));
      continue;
    }
    ++opened;
    spent += x;
    if (x > instance.upper[i] + tol) add("upper", i, x - instance.upper[i], "cost above upper bound" + at);
    if (x < instance.lower[i] - tol) add("lower", i, instance.lower[i] - x, "cost below lower bound" + at);
  }
  if (spent > instance.budget + tol) add("budget", -1, spent - instance.budget, "budget constraint violated");
  if (opened > instance.cap) add("cardinality", -1, opened - instance.cap, "too many open facilities");
  return out;
}

namespace {

void require_feasible(const Instance& instance, const Solution& solution) {
  auto violations = check_feasible(instance, solution);
  if (violations.empty()) return;
  std::string msg = "infeasible solution:";
  for (const auto& v : violations) msg += " [" + v.constraint + "] " + v.message + ";";
  throw Infeasible(msg);
}

}  // namespace

std::vector<double> choice_probs(const Instance& instance, const Solution& solution, Framework framework,
                                 int zone) {
  if (zone < 0 || zone >= instance.zones) throw InvalidInput("zone index out of range");
  require_feasible(instance, solution);
  const int m = instance.m;
  std::vector<double> probs(m + 1, 0.0);
  double denom = instance.u_comp[zone];
  for (int i = 0; i < m; ++i) {
    if (!solution.y[i]) continue;
    const double v = instance.a_at(zone, i) * solution.x[i] + instance.b_at(zone, i);
    probs[i] = framework == Framework::kArum ? std::exp(v) : v;
    denom += probs[i];
  }
  for (int i = 0; i < m; ++i) probs[i] /= denom;
  probs[m] = instance.u_comp[zone] / denom;
  return probs;
}

double eval_objective(const Instance& instance, const Solution& solution, Framework framework) {
  require_feasible(instance, solution);
  const auto y = solution.y_real();
  return framework == Framework::kMrum ? mrum_value(instance, y, solution.x)
                                       : arum_value(instance, y, solution.x);
}

double mrum_denominator(const Instance& instance, std::span<const double> y, std::span<const double> x,
                        int zone) {
  double d = instance.u_comp[zone];
  for (int i = 0; i < instance.m; ++i) {
    if (y[i] == 0.0) continue;
    d += y[i] * (instance.a_at(zone, i) * x[i] + instance.b_at(zone, i));
  }
  return d;
}

double mrum_value(const Instance& instance, std::span<const double> y, std::span<const double> x) {
  // Written as sum_n q_n * captured / d_n rather than q_n - q_n u_n / d_n so
  // that a closed configuration evaluates to exactly zero.
  double value = 0.0;
  for (int n = 0; n < instance.zones; ++n) {
    const double d = mrum_denominator(instance, y, x, n);
    value += instance.q[n] * (d - instance.u_comp[n]) / d;
  }
  return value;
}

void mrum_gradients(const Instance& instance, std::span<const double> y, std::span<const double> x,
                    std::span<double> grad_x, std::span<double> grad_y) {
  const int m = instance.m;
  for (int i = 0; i < m; ++i) {
    if (!grad_x.empty()) grad_x[i] = 0.0;
    if (!grad_y.empty()) grad_y[i] = 0.0;
  }
  for (int n = 0; n < instance.zones; ++n) {
    const double d = mrum_denominator(instance, y, x, n);
    const double w = instance.q[n] * instance.u_comp[n] / (d * d);
    for (int i = 0; i < m; ++i) {
      if (!grad_x.empty()) grad_x[i] += w * y[i] * instance.a_at(n, i);
      if (!grad_y.empty()) grad_y[i] += w * (instance.a_at(n, i) * x[i] + instance.b_at(n, i));
    }
  }
}

double arum_value(const Instance& instance, std::span<const double> y, std::span<const double> x) {
  double value = 0.0;
  for (int n = 0; n < instance.zones; ++n) {
    double s = 0.0;
    for (int i = 0; i < instance.m; ++i) {
      if (y[i] == 0.0) continue;
      s += y[i] * std::exp(instance.a_at(n, i) * x[i] + instance.b_at(n, i));
    }
    value += instance.q[n] * s / (instance.u_comp[n] + s);
  }
  return value;
}

void arum_gradient_x(const Instance& instance, std::span<const double> y, std::span<const double> x,
                     std::span<double> grad_x) {
  const int m = instance.m;
  std::vector<double> e(m);
  std::fill(grad_x.begin(), grad_x.end(), 0.0);
  for (int n = 0; n < instance.zones; ++n) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      e[i] = y[i] == 0.0 ? 0.0 : y[i] * std::exp(instance.a_at(n, i) * x[i] + instance.b_at(n, i));
      s += e[i];
    }
    const double d = instance.u_comp[n] + s;
    const double w = instance.q[n] * instance.u_comp[n] / (d * d);
    for (int i = 0; i < m; ++i) grad_x[i] += w * instance.a_at(n, i) * e[i];
  }
}

// --- JSON --------------------------------------------------------------------

nlohmann::json instance_to_json(const Instance& instance) {
  nlohmann::json doc;
  doc["m"] = instance.m;
  doc["zones"] = instance.zones;
  doc["q"] = instance.q;
  doc["a"] = instance.a;
  doc["b"] = instance.b;
  doc["u_comp"] = instance.u_comp;
  doc["budget"] = instance.budget;
  doc["cap"] = instance.cap;
  doc["lower"] = instance.lower;
  doc["upper"] = instance.upper;
  return doc;
}

namespace {

double number_field(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidInput(std::string("instance file: missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_number()) throw InvalidInput(std::string("instance file: field '") + key + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidInput(std::string("instance file: field '") + key + "' is not finite");
  return d;
}

int int_field(const nlohmann::json& doc, const char* key) {
  const double d = number_field(doc, key);
  if (d != std::floor(d)) throw InvalidInput(std::string("instance file: field '") + key + "' must be an integer");
  return static_cast<int>(d);
}

std::vector<double> array_field(const nlohmann::json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key)) throw InvalidInput(std::string("instance file: missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_array()) throw InvalidInput(std::string("instance file: field '") + key + "' is not an array");
  if (v.size() != expected) {
    throw InvalidInput(std::string("instance file: field '") + key + "' has length " + std::to_string(v.size()) +
                       ", expected " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& e : v) {
    if (!e.is_number()) throw InvalidInput(std::string("instance file: non-numeric entry in '") + key + "'");
    const double d = e.get<double>();
    if (!std::isfinite(d)) throw InvalidInput(std::string("instance file: non-finite entry in '") + key + "'");
    out.push_back(d);
  }
  return out;
}

}  // namespace

Instance instance_from_json(const nlohmann::json& doc, bool allow_negative_b) {
  if (!doc.is_object()) throw InvalidInput("instance file: top level must be an object");
  Instance inst;
  inst.m = int_field(doc, "m");
  inst.zones = int_field(doc, "zones");
  if (inst.m < 1 || inst.zones < 1) throw InvalidInput("instance file: m and zones must be positive");
  const auto m = static_cast<std::size_t>(inst.m);
  const auto zones = static_cast<std::size_t>(inst.zones);
  inst.q = array_field(doc, "q", zones);
  inst.a = array_field(doc, "a", zones * m);
  inst.b = array_field(doc, "b", zones * m);
  inst.u_comp = array_field(doc, "u_comp", zones);
  inst.budget = number_field(doc, "budget");
  inst.cap = int_field(doc, "cap");
  inst.lower = array_field(doc, "lower", m);
  inst.upper = array_field(doc, "upper", m);
  inst.validate(allow_negative_b);
  return inst;
}

Instance read_instance_file(const std::string& path, bool allow_negative_b) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("instance file '" + path + "': " + e.what());
  }
  return instance_from_json(doc, allow_negative_b);
}

void write_instance_file(const std::string& path, const Instance& instance, const nlohmann::json& extra) {
  instance.validate(true);
  auto doc = instance_to_json(instance);
  for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

std::string instance_hash(const Instance& instance) {
  const std::string canonical = instance_to_json(instance).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace capmax

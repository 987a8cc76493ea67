#include "capmax/conic.hpp"

#include <algorithm>
#include <cmath>

namespace capmax {

int ConicModel::num_continuous() const {
  return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const ConicVar& v) { return !v.binary; }));
}

int ConicModel::num_binary() const { return num_vars() - num_continuous(); }

int ConicModel::find(const std::string& name) const {
  for (int j = 0; j < num_vars(); ++j)
    if (vars[j].name == name) return j;
  return -1;
}

void ConicModel::validate() const {
  const int n = num_vars();
  auto in_range = [n](int j) { return j >= 0 && j < n; };
  for (const auto& v : vars) {
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub || v.lb == kInf || v.ub == -kInf) {
      throw InvalidInput("conic: bad bounds on variable " + v.name);
    }
    if (v.binary && (v.lb < 0.0 || v.ub > 1.0)) throw InvalidInput("conic: binary variable " + v.name + " exceeds [0,1]");
  }
  for (const auto& t : objective)
    if (!in_range(t.var) || !std::isfinite(t.coef)) throw InvalidInput("conic: bad objective term");
  if (!std::isfinite(objective_constant)) throw InvalidInput("conic: non-finite objective constant");
  for (const auto& row : rows) {
    if (!std::isfinite(row.rhs)) throw InvalidInput("conic: non-finite rhs in row " + row.name);
    for (const auto& t : row.terms)
      if (!in_range(t.var) || !std::isfinite(t.coef)) throw InvalidInput("conic: bad term in row " + row.name);
  }
  for (const auto& c : cones) {
    if (!in_range(c.a) || !in_range(c.b) || !(c.c == kConeOne || in_range(c.c))) {
      throw InvalidInput("conic: cone references a variable out of range");
    }
    if (vars[c.a].lb < 0.0 || vars[c.b].lb < 0.0) throw InvalidInput("conic: cone sides must be nonnegative");
  }
}

namespace {

void check_open_set(const Instance& instance, std::span<const std::uint8_t> open_set) {
  if (open_set.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("open set has wrong length");
  int count = 0;
  double lower = 0.0;
  for (int i = 0; i < instance.m; ++i) {
    if (open_set[i] > 1) throw InvalidInput("open set entries must be 0 or 1");
    if (open_set[i]) {
      ++count;
      lower += instance.lower[i];
    }
  }
  if (count > instance.cap) {
    throw Infeasible("cardinality violated: " + std::to_string(count) + " open > K = " + std::to_string(instance.cap));
  }
  if (lower > instance.budget + kFeasibilityTol) throw Infeasible("budget violated: sum of lower bounds exceeds C");
}

std::string idx(const char* base, int i) { return std::string(base) + "[" + std::to_string(i) + "]"; }

// Objective, w and theta blocks shared by both models. w_n is tied to its
// zone by a caller-supplied row.
void add_zone_blocks(const Instance& instance, ConicModel& model, std::vector<int>& w, std::vector<int>& theta) {
  w.resize(instance.zones);
  theta.resize(instance.zones);
  for (int n = 0; n < instance.zones; ++n) {
    w[n] = model.num_vars();
    model.vars.push_back({idx("w", n), 0.0, kInf, false});
  }
  for (int n = 0; n < instance.zones; ++n) {
    theta[n] = model.num_vars();
    model.vars.push_back({idx("theta", n), 0.0, kInf, false});
    model.objective.push_back({theta[n], instance.q[n] * instance.u_comp[n]});
  }
}

void add_cones(const Instance& instance, ConicModel& model, const std::vector<int>& w, const std::vector<int>& theta) {
  for (int n = 0; n < instance.zones; ++n) model.cones.push_back({theta[n], w[n], kConeOne});
}

}  // namespace

ConicModel build_cp_conic(const Instance& instance, std::span<const std::uint8_t> open_set) {
  instance.validate();
  check_open_set(instance, open_set);
  ConicModel model;
  model.kind = "cp";
  std::vector<int> x(instance.m, -1);
  for (int i = 0; i < instance.m; ++i) {
    if (!open_set[i]) continue;
    x[i] = model.num_vars();
    model.vars.push_back({idx("x", i), instance.lower[i], instance.upper[i], false});
  }
  std::vector<int> w, theta;
  add_zone_blocks(instance, model, w, theta);

  for (int n = 0; n < instance.zones; ++n) {
    ConicRow row{idx("def_w", n), {{w[n], 1.0}}, RowSense::kEqual, instance.u_comp[n]};
    for (int i = 0; i < instance.m; ++i) {
      if (x[i] < 0) continue;
      row.rhs += instance.b_at(n, i);
      if (instance.a_at(n, i) != 0.0) row.terms.push_back({x[i], -instance.a_at(n, i)});
    }
    model.rows.push_back(std::move(row));
  }
  ConicRow budget{"budget", {}, RowSense::kLessEqual, instance.budget};
  for (int i = 0; i < instance.m; ++i)
    if (x[i] >= 0) budget.terms.push_back({x[i], 1.0});
  model.rows.push_back(std::move(budget));
  add_cones(instance, model, w, theta);
  return model;
}

ConicModel build_fc_conic(const Instance& instance) {
  instance.validate();
  const int m = instance.m;
  ConicModel model;
  model.kind = "fc";
  std::vector<int> x(m), z(m), y(m);
  for (int i = 0; i < m; ++i) {
    x[i] = model.num_vars();
    model.vars.push_back({idx("x", i), 0.0, kInf, false});
  }
  for (int i = 0; i < m; ++i) {
    z[i] = model.num_vars();
    model.vars.push_back({idx("z", i), 0.0, kInf, false});
  }
  std::vector<int> w, theta;
  add_zone_blocks(instance, model, w, theta);
  for (int i = 0; i < m; ++i) {
    y[i] = model.num_vars();
    model.vars.push_back({idx("y", i), 0.0, 1.0, true});
  }

  for (int n = 0; n < instance.zones; ++n) {
    ConicRow row{idx("def_w", n), {{w[n], 1.0}}, RowSense::kEqual, instance.u_comp[n]};
    for (int i = 0; i < m; ++i) {
      if (instance.a_at(n, i) != 0.0) row.terms.push_back({z[i], -instance.a_at(n, i)});
      if (instance.b_at(n, i) != 0.0) row.terms.push_back({y[i], -instance.b_at(n, i)});
    }
    model.rows.push_back(std::move(row));
  }
  ConicRow budget{"budget", {}, RowSense::kLessEqual, instance.budget};
  ConicRow cardinality{"cardinality", {}, RowSense::kLessEqual, static_cast<double>(instance.cap)};
  for (int i = 0; i < m; ++i) {
    budget.terms.push_back({z[i], 1.0});
    cardinality.terms.push_back({y[i], 1.0});
  }
  model.rows.push_back(std::move(budget));
  model.rows.push_back(std::move(cardinality));

  for (int i = 0; i < m; ++i) {
    const double lo = instance.lower[i];
    const double hi = instance.upper[i];
    model.rows.push_back({idx("x_upper", i), {{x[i], 1.0}, {y[i], -hi}}, RowSense::kLessEqual, 0.0});
    model.rows.push_back({idx("x_lower", i), {{x[i], 1.0}, {y[i], -lo}}, RowSense::kGreaterEqual, 0.0});
    // z <= U y, z >= L y
    model.rows.push_back({idx("mc_zu", i), {{z[i], 1.0}, {y[i], -hi}}, RowSense::kLessEqual, 0.0});
    model.rows.push_back({idx("mc_zl", i), {{z[i], 1.0}, {y[i], -lo}}, RowSense::kGreaterEqual, 0.0});
    // z <= x, z >= x - U (1 - y). The envelope uses x in [0, U] since closed
    // sites have x = 0; the lower bound L only holds when y = 1.
    model.rows.push_back({idx("mc_xl", i), {{z[i], 1.0}, {x[i], -1.0}}, RowSense::kLessEqual, 0.0});
    model.rows.push_back({idx("mc_xu", i), {{z[i], 1.0}, {x[i], -1.0}, {y[i], -hi}}, RowSense::kGreaterEqual, -hi});
  }
  add_cones(instance, model, w, theta);
  return model;
}

std::vector<double> cp_point(const Instance& instance, std::span<const std::uint8_t> open_set,
                             std::span<const double> x) {
  check_open_set(instance, open_set);
  if (x.size() != static_cast<std::size_t>(instance.m)) throw InvalidInput("cost vector has wrong length");
  std::vector<double> yr(open_set.begin(), open_set.end());
  std::vector<double> point;
  for (int i = 0; i < instance.m; ++i)
    if (open_set[i]) point.push_back(x[i]);
  for (int n = 0; n < instance.zones; ++n) point.push_back(mrum_denominator(instance, yr, x, n));
  for (int n = 0; n < instance.zones; ++n) point.push_back(1.0 / mrum_denominator(instance, yr, x, n));
  return point;
}

std::vector<double> fc_point(const Instance& instance, const Solution& solution) {
  if (solution.y.size() != static_cast<std::size_t>(instance.m) || solution.x.size() != solution.y.size()) {
    throw InvalidInput("solution has wrong length");
  }
  const std::vector<double> yr = solution.y_real();
  std::vector<double> point(solution.x.begin(), solution.x.end());
  for (int i = 0; i < instance.m; ++i) point.push_back(yr[i] * solution.x[i]);
  for (int n = 0; n < instance.zones; ++n) point.push_back(mrum_denominator(instance, yr, solution.x, n));
  for (int n = 0; n < instance.zones; ++n) point.push_back(1.0 / mrum_denominator(instance, yr, solution.x, n));
  point.insert(point.end(), yr.begin(), yr.end());
  return point;
}

CheckReport check_point(const ConicModel& model, std::span<const double> v, double tol) {
  if (v.size() != model.vars.size()) {
    throw InvalidInput("assignment has " + std::to_string(v.size()) + " entries, model has " +
                       std::to_string(model.vars.size()) + " variables");
  }
  CheckReport r;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto& var = model.vars[j];
    r.max_bound_violation = std::max({r.max_bound_violation, var.lb - v[j], v[j] - var.ub});
    if (var.binary) r.max_integrality_violation = std::max(r.max_integrality_violation, std::abs(v[j] - std::round(v[j])));
  }
  for (const auto& row : model.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * v[t.var];
    double res = 0.0;
    switch (row.sense) {
      case RowSense::kEqual: res = std::abs(lhs - row.rhs); break;
      case RowSense::kLessEqual: res = std::max(0.0, lhs - row.rhs); break;
      case RowSense::kGreaterEqual: res = std::max(0.0, row.rhs - lhs); break;
    }
    r.max_linear_residual = std::max(r.max_linear_residual, res);
  }
  for (const auto& c : model.cones) {
    const double ca = v[c.a];
    const double cb = v[c.b];
    const double cc = c.c == kConeOne ? 1.0 : v[c.c];
    r.max_cone_violation = std::max({r.max_cone_violation, cc * cc - ca * cb, -ca, -cb});
    r.max_cone_gap = std::max(r.max_cone_gap, std::abs(ca * cb - cc * cc));
  }
  r.objective = model.objective_constant;
  for (const auto& t : model.objective) r.objective += t.coef * v[t.var];
  r.feasible = r.max_linear_residual <= tol && r.max_bound_violation <= tol && r.max_integrality_violation <= tol &&
               r.max_cone_violation <= tol;
  return r;
}

// --- Serialization -------------------------------------------------------------

namespace {

constexpr const char* kFormat = "capmax-conic/1";

nlohmann::json bound_to_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json terms_to_json(const std::vector<LinearTerm>& terms) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms) out.push_back({t.var, t.coef});
  return out;
}

const char* sense_name(RowSense s) {
  switch (s) {
    case RowSense::kEqual: return "eq";
    case RowSense::kLessEqual: return "le";
    case RowSense::kGreaterEqual: return "ge";
  }
  return "?";
}

const nlohmann::json& field(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw InvalidInput(std::string("conic file: missing field '") + key + "'");
  return doc.at(key);
}

double number(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) throw InvalidInput(std::string("conic file: ") + what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidInput(std::string("conic file: ") + what + " must be finite");
  return d;
}

int index(const nlohmann::json& v, const char* what) {
  if (!v.is_number_integer()) throw InvalidInput(std::string("conic file: ") + what + " must be an integer index");
  return v.get<int>();
}

std::vector<LinearTerm> terms_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw InvalidInput("conic file: terms must be an array");
  std::vector<LinearTerm> out;
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 2) throw InvalidInput("conic file: a term is an [index, coefficient] pair");
    out.push_back({index(t[0], "term index"), number(t[1], "coefficient")});
  }
  return out;
}

}  // namespace

nlohmann::json conic_to_json(const ConicModel& model) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["kind"] = model.kind;
  doc["sense"] = model.sense == ObjSense::kMinimize ? "minimize" : "maximize";
  doc["counts"] = {{"continuous", model.num_continuous()},
                   {"binary", model.num_binary()},
                   {"rows", model.rows.size()},
                   {"cones", model.cones.size()}};
  doc["objective"] = {{"constant", model.objective_constant}, {"terms", terms_to_json(model.objective)}};
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : model.vars) {
    vars.push_back({{"name", v.name},
                    {"lb", bound_to_json(v.lb)},
                    {"ub", bound_to_json(v.ub)},
                    {"type", v.binary ? "binary" : "continuous"}});
  }
  doc["variables"] = std::move(vars);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : model.rows) {
    rows.push_back({{"name", r.name}, {"sense", sense_name(r.sense)}, {"rhs", r.rhs}, {"terms", terms_to_json(r.terms)}});
  }
  doc["rows"] = std::move(rows);
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& c : model.cones) {
    cones.push_back({{"type", "rotated"},
                     {"a", c.a},
                     {"b", c.b},
                     {"c", c.c == kConeOne ? nlohmann::json(nullptr) : nlohmann::json(c.c)}});
  }
  doc["cones"] = std::move(cones);
  return doc;
}

ConicModel conic_from_json(const nlohmann::json& doc) {
  const auto& format = field(doc, "format");
  if (!format.is_string() || format.get<std::string>() != kFormat) {
    throw InvalidInput(std::string("conic file: unsupported format (expected ") + kFormat + ")");
  }
  ConicModel model;
  const auto& kind = field(doc, "kind");
  if (!kind.is_string()) throw InvalidInput("conic file: kind must be a string");
  model.kind = kind.get<std::string>();
  const auto& sense = field(doc, "sense");
  if (sense == "minimize") model.sense = ObjSense::kMinimize;
  else if (sense == "maximize") model.sense = ObjSense::kMaximize;
  else throw InvalidInput("conic file: sense must be minimize or maximize");

  const auto& obj = field(doc, "objective");
  model.objective_constant = number(field(obj, "constant"), "objective constant");
  model.objective = terms_from_json(field(obj, "terms"));

  for (const auto& v : field(doc, "variables")) {
    ConicVar var;
    const auto& name = field(v, "name");
    if (!name.is_string()) throw InvalidInput("conic file: variable name must be a string");
    var.name = name.get<std::string>();
    const auto& lb = field(v, "lb");
    const auto& ub = field(v, "ub");
    var.lb = lb.is_null() ? -kInf : number(lb, "lb");
    var.ub = ub.is_null() ? kInf : number(ub, "ub");
    const auto& type = field(v, "type");
    if (type == "binary") var.binary = true;
    else if (type != "continuous") throw InvalidInput("conic file: variable type must be continuous or binary");
    model.vars.push_back(std::move(var));
  }
  for (const auto& r : field(doc, "rows")) {
    ConicRow row;
    const auto& name = field(r, "name");
    if (!name.is_string()) throw InvalidInput("conic file: row name must be a string");
    row.name = name.get<std::string>();
    const auto& s = field(r, "sense");
    if (s == "eq") row.sense = RowSense::kEqual;
    else if (s == "le") row.sense = RowSense::kLessEqual;
    else if (s == "ge") row.sense = RowSense::kGreaterEqual;
    else throw InvalidInput("conic file: row sense must be eq, le or ge");
    row.rhs = number(field(r, "rhs"), "rhs");
    row.terms = terms_from_json(field(r, "terms"));
    model.rows.push_back(std::move(row));
  }
  for (const auto& c : field(doc, "cones")) {
    if (field(c, "type") != "rotated") throw InvalidInput("conic file: only rotated cones are supported");
    const auto& cc = field(c, "c");
    model.cones.push_back({index(field(c, "a"), "cone a"), index(field(c, "b"), "cone b"),
                           cc.is_null() ? kConeOne : index(cc, "cone c")});
  }
  model.validate();
  const auto& counts = field(doc, "counts");
  if (field(counts, "continuous") != model.num_continuous() || field(counts, "binary") != model.num_binary() ||
      field(counts, "rows") != model.rows.size() || field(counts, "cones") != model.cones.size()) {
    throw InvalidInput("conic file: counts block does not match the model");
  }
  return model;
}

std::string export_conic(const ConicModel& model) { return conic_to_json(model).dump(2) + "\n"; }

}  // namespace capmax

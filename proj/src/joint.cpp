#include "capmax/joint.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace capmax {

const char* to_string(JointStatus status) {
  switch (status) {
    case JointStatus::kOptimal: return "optimal";
    case JointStatus::kLimit: return "limit";
    case JointStatus::kLocalOptimum: return "local-optimum";
  }
  return "?";
}

std::string iteration_log_csv(const std::vector<IterationRecord>& log, bool zero_times) {
  std::string out = "iter,bound,incumbent,gap,seconds\n";
  for (const auto& r : log) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.iter, r.bound, r.incumbent, r.gap,
                       zero_times ? 0.0 : r.seconds);
  }
  return out;
}

nlohmann::json joint_result_to_json(const JointResult& result, bool zero_times) {
  nlohmann::json doc;
  doc["method"] = result.method;
  doc["status"] = to_string(result.status);
  doc["value"] = result.value;
  doc["bound"] = std::isfinite(result.bound) ? nlohmann::json(result.bound) : nlohmann::json(nullptr);
  doc["y"] = result.solution.y;
  doc["x"] = result.solution.x;
  doc["open"] = result.solution.open_count();
  doc["evaluations"] = result.evaluations;
  doc["seconds"] = zero_times ? 0.0 : result.seconds;
  doc["iterations"] = result.log.size();
  return doc;
}

}  // namespace capmax

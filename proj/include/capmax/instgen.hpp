// Seeded synthetic instance generator.

#pragma once

#include <cstdint>

#include "capmax/model.hpp"

namespace capmax {

enum class DemandRegime { kLow, kHigh };  // q in [1,10] or [90,100]

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct GenSpec {
  int m = 10;
  int zones = 10;
  double c_frac = 0.5;  // C = c_frac * m
  double k_frac = 0.5;  // K = round(k_frac * m), at least 1
  DemandRegime q_regime = DemandRegime::kLow;
  Interval a_range{0.5, 1.5};
  Interval b_range{1.0, 10.0};
  // L_i = lower_frac * C/K and U_i = L_i + width_frac * C/K, fractions drawn
  // uniformly from these intervals.
  Interval lower_frac{0.1, 0.5};
  Interval width_frac{0.5, 1.5};
  double u_comp = 1.0;
  std::uint64_t seed = 1;
};

// Throws InvalidInput for malformed specs and Infeasible when no single
// location can fit the budget.
Instance generate(const GenSpec& spec);

// Parameters echoed into instance files so a file can be regenerated.
nlohmann::json generator_metadata(const GenSpec& spec);

std::string to_string(DemandRegime regime);
DemandRegime demand_regime_from_string(const std::string& name);

}  // namespace capmax

// Shared instances and numeric helpers for the unit tests.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "capmax/instgen.hpp"
#include "capmax/model.hpp"

namespace capmax::testing {

// One zone, two locations where opening the weaker second site lowers the
// best achievable capture: Phi(1,0) = 15/16 > Phi(1,1) = 12/13.
inline Instance prop3_instance() {
  Instance inst;
  inst.m = 2;
  inst.zones = 1;
  inst.q = {1.0};
  inst.a = {5.0, 1.0};
  inst.b = {0.0, 0.0};
  inst.u_comp = {1.0};
  inst.budget = 4.0;
  inst.cap = 2;
  inst.lower = {2.0, 2.0};
  inst.upper = {3.0, 3.0};
  return inst;
}

// Additive framework, f = (e^x1 + 1.2 e^x2) / (1 + e^x1 + 1.2 e^x2) on
// x in [0,1]^2 with x1 + x2 <= 1.
inline Instance prop1_instance() {
  Instance inst;
  inst.m = 2;
  inst.zones = 1;
  inst.q = {1.0};
  inst.a = {1.0, 1.0};
  inst.b = {0.0, std::log(1.2)};
  inst.u_comp = {1.0};
  inst.budget = 1.0;
  inst.cap = 2;
  inst.lower = {0.0, 0.0};
  inst.upper = {1.0, 1.0};
  return inst;
}

inline Instance small_instance(int m, int zones, std::uint64_t seed, double c_frac = 0.5, double k_frac = 0.5) {
  GenSpec spec;
  spec.m = m;
  spec.zones = zones;
  spec.c_frac = c_frac;
  spec.k_frac = k_frac;
  spec.seed = seed;
  return generate(spec);
}

inline double central_diff(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-8);
}

}  // namespace capmax::testing

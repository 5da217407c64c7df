#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bwrisk {

struct DistortionFunction {
  std::string name;
  std::function<double(double)> g;
  // inf{t : g(t) >= u}; +infinity when no such t exists (u > 1).
  std::function<double(double)> ginv;
  // g'(t+), with g'(1+) taken as 0.
  std::function<double(double)> dg_right;
  std::vector<double> kinks;
};

// g(t) = min(t / (1 - alpha), 1)
DistortionFunction make_tvar_distortion(double alpha);
// g(t) = t^r, 0 < r <= 1
DistortionFunction make_power_distortion(double r);

// Grid checks: endpoints, monotonicity, midpoint concavity, inverse
// inequalities. Throws DomainError on the first failure.
void check_distortion(const DistortionFunction& d, int grid = 1000);

}  // namespace bwrisk

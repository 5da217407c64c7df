#pragma once

#include <cmath>
#include <limits>

#include "bwrisk/bregman.hpp"
#include "bwrisk/dist.hpp"
#include "bwrisk/distortion.hpp"

namespace bwrisk {

struct NumericsOptions {
  double tol = 1e-8;         // bisection width relative to M
  int grid = 10000;          // sign-scan grid for net prices
  int curve_points = 2000;   // samples in emitted curves
  int table_size = 4000;     // nodes of the budget kernel table
};

struct MarketScenario {
  double theta = 0.0;
  double alpha = 0.0;
  double kappa = 1.0;
  double epsilon = 0.0;
  double A = std::numeric_limits<double>::quiet_NaN();
  LossDistribution F0;
  LossDistribution SQ;
  BregmanGenerator gen;
  DistortionFunction g;
  double eta = 1.0;  // tie-break on the zero set of the Problem-1 net price
  NumericsOptions numerics{};

  double M() const { return gen.domain_max; }
};

}  // namespace bwrisk

#pragma once

#include <string>

#include "bwrisk/indemnity.hpp"
#include "bwrisk/scenario.hpp"

namespace bwrisk {

struct Thresholds {
  double d1 = 0.0;
  double d2 = 0.0;
};

struct MaxminSolution {
  Indemnity indemnity;
  double d1 = 0.0;
  double d2 = 0.0;
  double v_upper = 0.0;
  double v_lower = 0.0;
  double premium = 0.0;
  double objective = 0.0;
  // 1..4 follow the four layered forms; 5 is the zero contract.
  int case_id = 5;
  std::string case_label;
};

// d1 = inf{x : S_Q(x) <= 1/(1+theta)}, d2 = inf{x : S_Q(x) <= kappa/(1+theta)}.
Thresholds thresholds(const LossDistribution& SQ, double theta, double kappa);

// (1+theta) S_Q(t) - kappa 1[t <= v_upper] - (1-kappa) 1[t <= v_lower]
double net_price_H(double t, double theta, double kappa, const LossDistribution& SQ,
                   double v_upper, double v_lower);

// Branch of the layered solution selected by the ordering of the four points.
int maxmin_case(double d1, double d2, double v_lower, double v_upper);

MaxminSolution solve_maxmin(const MarketScenario& scn);

// kappa R(v_upper) + (1 - kappa) R(v_lower) + premium, R(x) = x - I(x).
double maxmin_objective(const Indemnity& I, const MarketScenario& scn, double v_upper,
                        double v_lower);

}  // namespace bwrisk

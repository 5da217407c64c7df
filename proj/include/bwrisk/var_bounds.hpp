#pragma once

#include "bwrisk/bregman.hpp"
#include "bwrisk/dist.hpp"

namespace bwrisk {

enum class BudgetSide { Upper, Lower };

struct VarBounds {
  double v_upper = 0.0;
  double v_lower = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  bool attained_upper = false;
  bool attained_lower = true;
};

// Upper: int_alpha^{F0(D)} B(D, F0^{-1}(t)) dt for D in (q_alpha, M].
// Lower: int_{F0(D)}^alpha B(D, F0^{-1}(t)) dt for D in [0, q_alpha).
double tail_budget(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                   double D, BudgetSide side, double tol = 1e-13);

// Default tol (<= 0) is 1e-8 * M.
double worst_case_var(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                      double epsilon, double tol = -1.0);
double best_case_var(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                     double epsilon, double tol = -1.0);
VarBounds var_bounds(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                     double epsilon, double tol = -1.0);

// Quantile flattened to V_upper - delta on (alpha - xi, F0(V_upper - delta)].
LossDistribution witness_near_worst(const BregmanGenerator& gen, const LossDistribution& F0,
                                    double alpha, double epsilon, double delta);
// Quantile flattened to V_lower on (F0(V_lower), alpha].
LossDistribution witness_best(const BregmanGenerator& gen, const LossDistribution& F0,
                              double alpha, double epsilon);

}  // namespace bwrisk

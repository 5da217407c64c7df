#pragma once

#include <string>
#include <vector>

#include "bwrisk/bregman.hpp"
#include "bwrisk/dist.hpp"
#include "bwrisk/scenario.hpp"
#include "bwrisk/survival_curve.hpp"

namespace bwrisk {

enum class TvarCase { i, ii, iii };

// Position of x_hat relative to V and x2. In case (ii) x2 coincides with V.
enum class TvarSubCase { none, hat_below_v, hat_between, hat_above_x2 };

struct TvarCaseReport {
  TvarCase case_id = TvarCase::i;
  TvarSubCase sub_case = TvarSubCase::none;
  double x_tilde = 0.0;  // VaR_alpha under Q
  double x_hat = 0.0;    // clamped to M; M when beta = 0
  double x2 = 0.0;
  double factor = 0.0;   // (1 + lambda)(1 + theta)
  std::vector<std::string> notes;
};

std::string to_string(TvarCase c);
std::string to_string(TvarSubCase s);

// Case only; x_hat is reported for beta = 0.
TvarCaseReport classify_case(double lambda, double theta, double alpha, const LossDistribution& SQ,
                             double v_upper);
TvarCaseReport classify_case(double lambda, double theta, double alpha, const LossDistribution& SQ,
                             double v_upper, double beta, const BregmanGenerator& gen);

// S_Q([phi']^{-1}(phi'(x) - 1/(beta (1 - alpha))))
double tvar_s_hat(double x, double beta, double alpha, const LossDistribution& SQ,
                  const BregmanGenerator& gen);
double tvar_g_hat(double x, double beta, double alpha, const LossDistribution& SQ,
                  const BregmanGenerator& gen);

// Pointwise closed form of G*(x; beta) for scenarios with g = TVaR_alpha and F0 = Q.
double tvar_g_star_value(double x, double beta, double lambda, const MarketScenario& scn,
                         double v_upper);
SurvivalCurve tvar_g_star(double beta, double lambda, const MarketScenario& scn, double v_upper);
SurvivalCurve tvar_g_star(double beta, double lambda, const MarketScenario& scn);

}  // namespace bwrisk

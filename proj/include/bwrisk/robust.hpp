#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bwrisk/budget.hpp"
#include "bwrisk/indemnity.hpp"
#include "bwrisk/scenario.hpp"
#include "bwrisk/survival_curve.hpp"

namespace bwrisk {

// Finite union of half-open intervals [a, b).
struct IntervalSet {
  std::vector<std::pair<double, double>> parts;
  bool contains(double x) const;
  bool contains_left(double x) const;  // membership of x- (a < x <= b)
  double length() const;
};

struct RegionPartition {
  double v_upper = 0.0;
  double lambda = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  IntervalSet A1, B1, A2, B2;
};

// Scenario-level data shared by every multiplier value.
class RobustContext {
 public:
  explicit RobustContext(const MarketScenario& scn);
  RobustContext(const MarketScenario& scn, double v_upper);

  const MarketScenario& scenario() const { return scn_; }
  const BudgetKernel& kernel() const { return *kernel_; }
  double v_upper() const { return v_upper_; }
  double zeta() const { return zeta_; }

 private:
  MarketScenario scn_;
  std::shared_ptr<const BudgetKernel> kernel_;
  double v_upper_;
  double zeta_;
};

// H(x; S, lambda) with S(x) = s.
double net_price_value(double x, double s, double lambda, const MarketScenario& scn,
                       double v_upper);
double net_price(double x, const SurvivalCurve& S, double lambda, const MarketScenario& scn,
                 double v_upper);

RegionPartition region_partition(const MarketScenario& scn, double lambda, double v_upper);

double g_hat(double x, double beta, const MarketScenario& scn);
double g_star(double x, double beta, double lambda, const MarketScenario& scn, double v_upper,
              const RegionPartition& part);
double g_star_left(double x, double beta, double lambda, const MarketScenario& scn,
                   double v_upper, const RegionPartition& part);
// Tabulated G* with knots at every region boundary.
SurvivalCurve g_star_curve(double beta, double lambda, const MarketScenario& scn, double v_upper,
                           const RegionPartition& part);

// Admissible flat levels [G*(V-), G*(V)] (a single point without an upward jump).
std::pair<double, double> admissible_b(const SurvivalCurve& Gstar, double v_upper);
SurvivalCurve modified_survival(const SurvivalCurve& Gstar, double b, double v_upper);

// int j(S(x), x) dx: the budget functional, equal to BW(S, F0) minus the
// benchmark term.
double budget_functional(const BudgetKernel& K, const SurvivalCurve& S);
// int min(g(S), c(x)) dx - beta * budget_functional.
double lagrangian(const RobustContext& ctx, const SurvivalCurve& S, double lambda, double beta);

double psi(double beta, double lambda, const MarketScenario& scn);

struct InnerSolution {
  SurvivalCurve curve;  // carries the exact evaluator
  double beta_star = 0.0;
  double b_star = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double psi = 0.0;
  double zeta = 0.0;
  double lagrangian = 0.0;  // at beta_star
  double value = 0.0;       // int min(g(S*), c) dx
  RegionPartition partition;
  std::vector<std::string> diagnostics;
};

// beta_hint > 0 seeds the multiplier bracket.
InnerSolution solve_inner(double lambda, const RobustContext& ctx, double beta_hint = 0.0);
InnerSolution solve_inner(double lambda, const MarketScenario& scn);

Indemnity indemnity_from_survival(const SurvivalCurve& S, double lambda,
                                  const MarketScenario& scn, double v_upper, double eta_tilde,
                                  const std::vector<double>& extra_breaks = {});

// pi(I) - I(V) - (A - V)
double constraint_residual(const Indemnity& I, const MarketScenario& scn, double v_upper);
// min over contracts of pi(I) - I(V).
double assumption1_minimum(const MarketScenario& scn, double v_upper);

struct RobustSolution {
  Indemnity indemnity;
  SurvivalCurve worst_survival;
  double lambda_star = 0.0;
  double beta_star = 0.0;
  double b_star = 0.0;
  double eta_tilde = 1.0;
  double slack = 0.0;
  double kkt_residual = 0.0;
  double v_upper = 0.0;
  double zeta = 0.0;
  double psi = 0.0;
  double premium = 0.0;
  double objective = 0.0;   // pi(I) + int g(S*)(1 - I') dx
  double dual_value = 0.0;  // int min(g(S*), c) dx - lambda (A - V)
  double zero_set_length = 0.0;
  RegionPartition partition;
  std::vector<std::string> diagnostics;
};

RobustSolution solve_problem2(const MarketScenario& scn);

}  // namespace bwrisk

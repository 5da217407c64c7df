#include "bwrisk/var_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "bwrisk/errors.hpp"
#include "bwrisk/numerics.hpp"

namespace bwrisk {
namespace {

void check_level(double alpha, double epsilon) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
  if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
}

// int_{lo}^{hi} B(D, F0^{-1}(t)) dt
double budget_between(const BregmanGenerator& gen, const LossDistribution& F0, double D,
                      double lo, double hi, double tol) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> br = F0.p_breaks();
  for (double k : gen.kinks) br.push_back(F0.cdf(k));
  return num::integrate(
      [&](double t) {
        const double y = F0.quantile(t);
        return y == D ? 0.0 : std::max(0.0, bregman(gen, D, y));
      },
      lo, hi, br, {tol, 1e-13, 20000});
}

double upper_budget(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                    double D, double tol) {
  return budget_between(gen, F0, D, alpha, F0.cdf(D), tol);
}

double lower_budget(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                    double D, double tol) {
  return budget_between(gen, F0, D, F0.cdf(D), alpha, tol);
}

double default_tol(double tol, double M) { return tol > 0 ? tol : 1e-8 * M; }

}  // namespace

double tail_budget(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                   double D, BudgetSide side, double tol) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("tail_budget: alpha must lie in (0,1)");
  const double q = F0.quantile(alpha), M = F0.support_max();
  if (side == BudgetSide::Upper) {
    if (!(D > q && D <= M)) throw DomainError("tail_budget: upper side needs D in (q_alpha, M]");
    return upper_budget(gen, F0, alpha, D, tol);
  }
  if (!(D >= 0 && D < q)) throw DomainError("tail_budget: lower side needs D in [0, q_alpha)");
  return lower_budget(gen, F0, alpha, D, tol);
}

double worst_case_var(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                      double epsilon, double tol) {
  check_level(alpha, epsilon);
  const double M = F0.support_max();
  tol = default_tol(tol, M);
  const double q = F0.quantile(alpha);
  if (upper_budget(gen, F0, alpha, M, 1e-14) < epsilon) return M;
  const double lo = std::min(q + 1e-9, M);
  auto reached = [&](double D) { return upper_budget(gen, F0, alpha, D, 1e-14) >= epsilon; };
  if (reached(lo)) return lo;
  return num::bisect_first_true(reached, lo, M, tol);
}

double best_case_var(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                     double epsilon, double tol) {
  check_level(alpha, epsilon);
  const double M = F0.support_max();
  tol = default_tol(tol, M);
  const double q = F0.quantile(alpha);
  auto within = [&](double D) { return lower_budget(gen, F0, alpha, D, 1e-14) <= epsilon; };
  if (within(0.0)) return 0.0;
  return num::bisect_first_true(within, 0.0, q, tol);
}

VarBounds var_bounds(const BregmanGenerator& gen, const LossDistribution& F0, double alpha,
                     double epsilon, double tol) {
  VarBounds vb;
  vb.alpha = alpha;
  vb.epsilon = epsilon;
  vb.v_upper = worst_case_var(gen, F0, alpha, epsilon, tol);
  vb.v_lower = best_case_var(gen, F0, alpha, epsilon, tol);
  vb.attained_upper = vb.v_upper >= F0.support_max() &&
                      upper_budget(gen, F0, alpha, F0.support_max(), 1e-14) <= epsilon;
  vb.attained_lower = true;
  return vb;
}

LossDistribution witness_near_worst(const BregmanGenerator& gen, const LossDistribution& F0,
                                    double alpha, double epsilon, double delta) {
  const double vu = worst_case_var(gen, F0, alpha, epsilon);
  const double q = F0.quantile(alpha);
  if (!(delta > 0 && delta < vu - q))
    throw DomainError("witness_near_worst: delta must lie in (0, V_upper - q_alpha)");
  const double D = vu - delta;
  const double top = F0.cdf(D);
  auto budget = [&](double xi) { return budget_between(gen, F0, D, alpha - xi, top, 1e-14); };
  double xi;
  if (budget(alpha) <= epsilon) {
    xi = alpha * (1.0 - 1e-12);
  } else {
    const double hi = num::bisect_first_true([&](double x) { return budget(x) > epsilon; }, 0.0,
                                             alpha, 1e-10);
    xi = std::max(0.0, hi - 2e-10);
    while (xi > 0 && budget(xi) > epsilon) xi *= 0.5;
  }
  return LossDistribution::flattened(F0, alpha - xi, top, D);
}

LossDistribution witness_best(const BregmanGenerator& gen, const LossDistribution& F0,
                              double alpha, double epsilon) {
  const double vl = best_case_var(gen, F0, alpha, epsilon);
  return LossDistribution::flattened(F0, F0.cdf(vl), alpha, vl);
}

}  // namespace bwrisk

#include "bwrisk/alpha_maxmin.hpp"

#include <algorithm>

#include "bwrisk/errors.hpp"
#include "bwrisk/var_bounds.hpp"

namespace bwrisk {
namespace {

// inf{x in [0, M] : S_Q(x) <= p}
double survival_threshold(const LossDistribution& SQ, double p) {
  const double u = 1.0 - p;
  if (u <= 0.0) return 0.0;
  return SQ.quantile(std::min(u, 1.0));
}

}  // namespace

Thresholds thresholds(const LossDistribution& SQ, double theta, double kappa) {
  if (!(theta > 0)) throw DomainError("thresholds: theta must be positive");
  if (!(kappa >= 0 && kappa <= 1)) throw DomainError("thresholds: kappa must lie in [0,1]");
  return {survival_threshold(SQ, 1.0 / (1.0 + theta)),
          survival_threshold(SQ, kappa / (1.0 + theta))};
}

double net_price_H(double t, double theta, double kappa, const LossDistribution& SQ,
                   double v_upper, double v_lower) {
  double h = (1.0 + theta) * SQ.survival(t);
  if (t <= v_upper) h -= kappa;
  if (t <= v_lower) h -= 1.0 - kappa;
  return h;
}

int maxmin_case(double d1, double d2, double vl, double vu) {
  if (d1 < vl && vl < vu && vu <= d2) return 1;
  if (d1 < vl && vl <= d2 && d2 < vu) return 2;
  if (vl <= d1 && d1 <= d2 && d2 < vu) return 3;
  if (d1 <= d2 && d2 < vl && vl < vu) return 4;
  return 5;
}

double maxmin_objective(const Indemnity& I, const MarketScenario& scn, double vu, double vl) {
  const double prem = expected_value_premium(I, scn.SQ, scn.theta);
  return scn.kappa * (vu - I(vu)) + (1.0 - scn.kappa) * (vl - I(vl)) + prem;
}

MaxminSolution solve_maxmin(const MarketScenario& scn) {
  const double M = scn.M();
  MaxminSolution sol;
  const double tol = scn.numerics.tol * M;
  sol.v_upper = worst_case_var(scn.gen, scn.F0, scn.alpha, scn.epsilon, tol);
  sol.v_lower = best_case_var(scn.gen, scn.F0, scn.alpha, scn.epsilon, tol);
  const Thresholds th = thresholds(scn.SQ, scn.theta, scn.kappa);
  sol.d1 = th.d1;
  sol.d2 = th.d2;
  const double d1 = th.d1, d2 = th.d2, vl = sol.v_lower, vu = sol.v_upper;
  sol.case_id = maxmin_case(d1, d2, vl, vu);
  switch (sol.case_id) {
    case 1:
      sol.indemnity = Indemnity::layer(d1, vl, M);
      sol.case_label = "d1 < V_lower < V_upper <= d2";
      break;
    case 2:
      sol.indemnity = Indemnity::from_pieces({{d1, vl, 1.0}, {d2, vu, 1.0}}, M);
      sol.case_label = "d1 < V_lower <= d2 < V_upper";
      break;
    case 3:
      sol.indemnity = Indemnity::layer(d2, vu, M);
      sol.case_label = "V_lower <= d1 <= d2 < V_upper";
      break;
    case 4:
      sol.indemnity = Indemnity::layer(d1, vu, M);
      sol.case_label = "d1 <= d2 < V_lower < V_upper";
      break;
    default:
      sol.indemnity = Indemnity::zero(M);
      sol.case_label = "otherwise";
  }
  if (scn.eta != 1.0) {
    // Alternative tie-break on {H = 0}: rebuild the marginal rule directly.
    auto H = [&](double t) { return net_price_H(t, scn.theta, scn.kappa, scn.SQ, vu, vl); };
    std::vector<double> extra{vl, vu, d1, d2};
    for (double b : scn.SQ.x_breaks()) extra.push_back(b);
    sol.indemnity = indemnity_from_sign(H, M, scn.eta, scn.numerics.grid, extra, 1e-12);
  }
  sol.premium = expected_value_premium(sol.indemnity, scn.SQ, scn.theta);
  sol.objective = scn.kappa * (vu - sol.indemnity(vu)) +
                  (1.0 - scn.kappa) * (vl - sol.indemnity(vl)) + sol.premium;
  return sol;
}

}  // namespace bwrisk

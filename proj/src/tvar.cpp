#include "bwrisk/tvar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "bwrisk/var_bounds.hpp"

namespace bwrisk {

std::string to_string(TvarCase c) {
  switch (c) {
    case TvarCase::i: return "i";
    case TvarCase::ii: return "ii";
    case TvarCase::iii: return "iii";
  }
  return "?";
}

std::string to_string(TvarSubCase s) {
  switch (s) {
    case TvarSubCase::none: return "none";
    case TvarSubCase::hat_below_v: return "x_hat<=V";
    case TvarSubCase::hat_between: return "V<x_hat<=x2";
    case TvarSubCase::hat_above_x2: return "x_hat>x2";
  }
  return "?";
}

namespace {

void check_regime(double theta, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("tvar: alpha must lie in (0,1)");
  if ((1.0 + theta) * (1.0 - alpha) >= 1.0) {
    std::ostringstream os;
    os << "tvar: (1+theta)(1-alpha) = " << (1.0 + theta) * (1.0 - alpha)
       << " >= 1 is outside the closed-form regime";
    throw UnsupportedRegime(os.str());
  }
}

double x_hat_of(double x_tilde, double beta, double alpha, const BregmanGenerator& gen) {
  const double M = gen.domain_max;
  if (!(beta > 0)) return M;
  const double u = gen.dphi(x_tilde) + 1.0 / (beta * (1.0 - alpha));
  if (u >= gen.dphi(M)) return M;
  return std::clamp(gen.dphi_inverse(u), 0.0, M);
}

void require_same_benchmark(const MarketScenario& scn) {
  const double M = scn.M();
  for (int i = 0; i <= 16; ++i) {
    const double x = M * i / 16.0 * 0.25;
    if (std::abs(scn.F0.survival(x) - scn.SQ.survival(x)) > 1e-12)
      throw DomainError("tvar: the closed form requires the benchmark to equal Q");
  }
}

}  // namespace

TvarCaseReport classify_case(double lambda, double theta, double alpha, const LossDistribution& SQ,
                             double v_upper) {
  BregmanGenerator none;
  none.domain_max = SQ.support_max();
  TvarCaseReport r = classify_case(lambda, theta, alpha, SQ, v_upper, 0.0, none);
  return r;
}

TvarCaseReport classify_case(double lambda, double theta, double alpha, const LossDistribution& SQ,
                             double v_upper, double beta, const BregmanGenerator& gen) {
  check_regime(theta, alpha);
  if (!(lambda >= 0) || !(beta >= 0)) throw DomainError("classify_case: lambda and beta must be >= 0");
  TvarCaseReport r;
  const double k = (1.0 + lambda) * (1.0 + theta);
  r.factor = k;
  r.x_tilde = SQ.quantile(alpha);
  const double sv = SQ.survival(v_upper);
  if (k < 1.0 / (1.0 - alpha))
    r.case_id = TvarCase::i;
  else if (k * sv <= 1.0)
    r.case_id = TvarCase::ii;
  else
    r.case_id = TvarCase::iii;
  r.x2 = v_upper;
  if (r.case_id == TvarCase::iii) r.x2 = std::max(v_upper, SQ.upper_quantile(1.0 - 1.0 / k));
  if (r.case_id == TvarCase::ii && k * sv > 1.0) {
    std::ostringstream os;
    os << "case (ii) with (1+lambda)(1+theta) S_Q(V) = " << k * sv << " > 1";
    r.notes.push_back(os.str());
  }
  r.x_hat = gen.dphi ? x_hat_of(r.x_tilde, beta, alpha, gen) : gen.domain_max;
  if (r.case_id == TvarCase::i)
    r.sub_case = TvarSubCase::none;
  else if (r.x_hat <= v_upper)
    r.sub_case = TvarSubCase::hat_below_v;
  else if (r.x_hat <= r.x2 && r.case_id == TvarCase::iii)
    r.sub_case = TvarSubCase::hat_between;
  else
    r.sub_case = TvarSubCase::hat_above_x2;
  return r;
}

double tvar_s_hat(double x, double beta, double alpha, const LossDistribution& SQ,
                  const BregmanGenerator& gen) {
  if (!(beta > 0)) throw DomainError("tvar_s_hat: beta must be positive");
  const double u = gen.dphi(x) - 1.0 / (beta * (1.0 - alpha));
  if (u <= gen.dphi(0.0)) return SQ.survival(0.0);
  const double y = std::clamp(gen.dphi_inverse(u), 0.0, gen.domain_max);
  return SQ.survival(y);
}

double tvar_g_hat(double x, double beta, double alpha, const LossDistribution& SQ,
                  const BregmanGenerator& gen) {
  const double s = SQ.survival(x);
  if (!(beta > 0)) return std::max(1.0 - alpha, s);
  const double xt = SQ.quantile(alpha);
  if (x < xt) return s;
  if (x < x_hat_of(xt, beta, alpha, gen)) return 1.0 - alpha;
  return tvar_s_hat(x, beta, alpha, SQ, gen);
}

double tvar_g_star_value(double x, double beta, double lambda, const MarketScenario& scn,
                         double v_upper) {
  const double a = scn.alpha;
  const TvarCaseReport r = classify_case(lambda, scn.theta, a, scn.SQ, v_upper, beta, scn.gen);
  const double s = scn.SQ.survival(x);
  if (r.case_id == TvarCase::i || x < v_upper) return s;
  const double cap = (1.0 - a) * r.factor * s;
  // With beta = 0 the hat curve never leaves the plateau.
  auto shat = [&](double y) { return beta > 0 ? tvar_s_hat(y, beta, a, scn.SQ, scn.gen) : 1.0 - a; };
  switch (r.sub_case) {
    case TvarSubCase::hat_below_v:
      if (x < r.x2) return shat(x);
      return std::min(shat(x), cap);
    case TvarSubCase::hat_between:
      if (x < r.x_hat) return 1.0 - a;
      if (x < r.x2) return shat(x);
      return std::min(shat(x), cap);
    case TvarSubCase::hat_above_x2:
      if (x < r.x2) return 1.0 - a;
      if (x < r.x_hat) return cap;
      return std::min(shat(x), cap);
    case TvarSubCase::none: break;
  }
  return s;
}

SurvivalCurve tvar_g_star(double beta, double lambda, const MarketScenario& scn, double v_upper) {
  require_same_benchmark(scn);
  const double M = scn.M();
  const TvarCaseReport r = classify_case(lambda, scn.theta, scn.alpha, scn.SQ, v_upper, beta, scn.gen);
  const int n = std::max(2, scn.numerics.curve_points);
  std::vector<double> xs;
  for (int i = 0; i <= n; ++i) xs.push_back(M * i / n);
  for (int i = 1; i < n; ++i) xs.push_back(scn.SQ.quantile(double(i) / n));
  const std::vector<double> keys{v_upper, r.x2, r.x_hat, r.x_tilde};
  for (double k : keys)
    if (k > 0 && k < M) xs.push_back(k);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> gx, gv;
  auto f = [&](double x) { return tvar_g_star_value(x, beta, lambda, scn, v_upper); };
  for (double x : xs) {
    if (std::find(keys.begin(), keys.end(), x) != keys.end()) {
      const double l = f(std::nextafter(x, 0.0));
      if (l != f(x)) {
        gx.push_back(x);
        gv.push_back(l);
      }
    }
    gx.push_back(x);
    gv.push_back(f(x));
  }
  SurvivalCurve c(gx, gv);
  const MarketScenario copy = scn;
  c.attach_exact([copy, beta, lambda, v_upper](double x) {
    return tvar_g_star_value(x, beta, lambda, copy, v_upper);
  });
  return c;
}

SurvivalCurve tvar_g_star(double beta, double lambda, const MarketScenario& scn) {
  return tvar_g_star(beta, lambda, scn,
                     worst_case_var(scn.gen, scn.F0, scn.alpha, scn.epsilon, scn.numerics.tol * scn.M()));
}

}  // namespace bwrisk

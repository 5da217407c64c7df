#include <doctest.h>

#include <cmath>

#include "bwrisk/errors.hpp"
#include "bwrisk/robust.hpp"
#include "bwrisk/tvar.hpp"
#include "bwrisk/var_bounds.hpp"
#include "oracles.hpp"

using namespace bwrisk;

namespace {

MarketScenario scenario(double alpha) {
  auto s = oracle::guaranteed_var(1.4);
  s.alpha = alpha;
  s.g = make_tvar_distortion(alpha);
  return s;
}

double vbar(const MarketScenario& s) { return worst_case_var(s.gen, s.F0, s.alpha, s.epsilon); }

std::vector<double> probe_points(const MarketScenario& s, double V, const TvarCaseReport& r) {
  std::vector<double> xs;
  for (int i = 0; i <= 400; ++i) xs.push_back(30.0 * i / 400.0);
  for (double k : {V, r.x2, r.x_hat, r.x_tilde})
    for (double d : {-1e-7, 0.0, 1e-7})
      if (k + d >= 0 && k + d <= s.M()) xs.push_back(k + d);
  xs.push_back(s.M());
  return xs;
}

}  // namespace

TEST_CASE("case classification") {
  const auto s = scenario(0.95);
  const double V = vbar(s);
  CHECK(classify_case(0.0, 0.5, 0.95, s.SQ, V).case_id == TvarCase::i);
  // (1+lambda)(1+theta) = 1/S_Q(V) sits on the (ii)/(iii) boundary.
  const double lb = 1.0 / (1.5 * s.SQ.survival(V)) - 1.0;
  CHECK(classify_case(lb * (1 - 1e-12), 0.5, 0.95, s.SQ, V).case_id == TvarCase::ii);
  CHECK(classify_case(lb * (1 + 1e-9), 0.5, 0.95, s.SQ, V).case_id == TvarCase::iii);
  // 1/(1 - alpha) = 20 opens case (ii).
  CHECK(classify_case(20.0 / 1.5 - 1.0 + 1e-9, 0.5, 0.95, s.SQ, V).case_id == TvarCase::ii);
  CHECK(classify_case(20.0 / 1.5 - 1.0 - 1e-9, 0.5, 0.95, s.SQ, V).case_id == TvarCase::i);
  // x_hat from [phi']^{-1}(u) = e^{u-1} - 1, clamped to M.
  const auto r = classify_case(50.0, 0.5, 0.95, s.SQ, V, 1.0, s.gen);
  CHECK(r.x_tilde == doctest::Approx(2.9957).epsilon(1e-4));
  CHECK(std::exp(std::log(1 + r.x_tilde) + 20.0) - 1.0 > 100.0);
  CHECK(r.x_hat == 100.0);
  const auto r2 = classify_case(50.0, 0.5, 0.95, s.SQ, V, 40.0, s.gen);
  CHECK(r2.x_hat == doctest::Approx(std::exp(std::log(1 + r2.x_tilde) + 1.0 / (40.0 * 0.05)) - 1.0));
  CHECK_THROWS_AS(classify_case(0.0, 30.0, 0.95, s.SQ, V), UnsupportedRegime);
}

TEST_CASE("hat curve pieces and the generic bisection") {
  for (double alpha : {0.9, 0.95, 0.99}) {
    const auto s = scenario(alpha);
    const double xt = s.SQ.quantile(alpha);
    for (double beta : {1.0, 20.0, 200.0}) {
      const auto r = classify_case(50.0, 0.5, alpha, s.SQ, vbar(s), beta, s.gen);
      for (int i = 0; i <= 600; ++i) {
        const double x = 40.0 * i / 600.0;
        const double c = tvar_g_hat(x, beta, alpha, s.SQ, s.gen);
        if (x < xt) CHECK(c == doctest::Approx(s.SQ.survival(x)));
        else if (x < r.x_hat) {
          CHECK(c == 1.0 - alpha);
          // Plateau value reproduced by the generic construction.
          CHECK(std::abs(g_hat(x, beta, s) - (1.0 - alpha)) <= 1e-8);
        } else CHECK(c == doctest::Approx(tvar_s_hat(x, beta, alpha, s.SQ, s.gen)));
        CHECK(std::abs(c - g_hat(x, beta, s)) <= 1e-8);
      }
    }
    CHECK(tvar_g_hat(xt + 1.0, 0.0, alpha, s.SQ, s.gen) == std::max(1 - alpha, s.SQ.survival(xt + 1.0)));
  }
}

TEST_CASE("property: closed form equals the generic G* over a 3x3x3 sweep") {
  int covered[3][4] = {};
  for (double alpha : {0.9, 0.95, 0.99}) {
    const auto s = scenario(alpha);
    const double V = vbar(s);
    for (double lam : {0.0, 20.0, 150.0}) {
      const auto part = region_partition(s, lam, V);
      for (double beta : {0.0, 1.0, 50.0}) {
        const auto r = classify_case(lam, s.theta, alpha, s.SQ, V, beta, s.gen);
        covered[static_cast<int>(r.case_id)][static_cast<int>(r.sub_case)]++;
        double worst = 0.0;
        for (double x : probe_points(s, V, r))
          worst = std::max(worst, std::abs(tvar_g_star_value(x, beta, lam, s, V) - g_star(x, beta, lam, s, V, part)));
        CHECK(worst <= 1e-8);
      }
    }
  }
  CHECK(covered[0][0] > 0);
  CHECK(covered[1][0] + covered[1][1] + covered[1][2] + covered[1][3] > 0);
  CHECK(covered[2][0] + covered[2][1] + covered[2][2] + covered[2][3] > 0);
}

TEST_CASE("case (i) is the benchmark curve") {
  const auto s = scenario(0.95);
  const auto c = tvar_g_star(5.0, 0.0, s);
  for (int i = 0; i <= 1000; ++i) {
    const double x = 100.0 * i / 1000.0;
    CHECK(c(x) == s.SQ.survival(x));
  }
  const auto sol = solve_problem2(oracle::guaranteed_var(1.406));
  CHECK(sol.lambda_star == 0.0);
  for (int i = 0; i <= 200; ++i) {
    const double x = 20.0 * i / 200.0;
    CHECK(sol.worst_survival(x) == doctest::Approx(s.SQ.survival(x)).epsilon(1e-12));
    CHECK(sol.indemnity(x) == doctest::Approx(std::max(0.0, x - std::log(1.5))).epsilon(1e-9));
  }
}

TEST_CASE("case (ii) with x_hat above V: the scaled piece") {
  const auto s = scenario(0.95);
  const double V = vbar(s);
  const double lam = 20.0, beta = 20.0;
  const auto r = classify_case(lam, s.theta, s.alpha, s.SQ, V, beta, s.gen);
  REQUIRE(r.case_id == TvarCase::ii);
  REQUIRE(r.sub_case == TvarSubCase::hat_above_x2);
  CHECK(r.x2 == V);
  const auto c = tvar_g_star(beta, lam, s, V);
  for (int i = 1; i < 50; ++i) {
    const double x = V + (r.x_hat - V) * i / 50.0;
    CHECK(c(x) == doctest::Approx(0.05 * 21.0 * 1.5 * s.SQ.survival(x)).epsilon(1e-12));
  }
}

TEST_CASE("case (iii) with x2 below x_hat: the plateau on [V, x2)") {
  const auto s = scenario(0.95);
  const double V = vbar(s);
  const double lam = 150.0, beta = 1.0;
  const auto r = classify_case(lam, s.theta, s.alpha, s.SQ, V, beta, s.gen);
  REQUIRE(r.case_id == TvarCase::iii);
  REQUIRE(r.sub_case == TvarSubCase::hat_above_x2);
  CHECK(r.x2 > V);
  const auto c = tvar_g_star(beta, lam, s, V);
  for (int i = 0; i < 50; ++i) CHECK(c(V + (r.x2 - V) * i / 50.0) == 1.0 - 0.95);
  for (int i = 0; i < 50; ++i) {
    const double x = r.x2 + (std::min(r.x_hat, 40.0) - r.x2) * (i + 0.5) / 50.0;
    CHECK(c(x) == doctest::Approx(0.05 * 151.0 * 1.5 * s.SQ.survival(x)).epsilon(1e-12));
  }
  for (int i = 0; i < 50; ++i) {
    const double x = V * i / 50.0;
    CHECK(c(x) == s.SQ.survival(x));
  }
}

TEST_CASE("closed form requires F0 = Q") {
  auto s = scenario(0.95);
  s.SQ = make_truncated_exponential(1.2, 100.0);
  CHECK_THROWS_AS(tvar_g_star(1.0, 20.0, s, 5.0), DomainError);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "bwrisk/alpha_maxmin.hpp"
#include "bwrisk/errors.hpp"
#include "bwrisk/var_bounds.hpp"
#include "oracles.hpp"

using namespace bwrisk;

namespace {

const oracle::TruncExp kExp;

// kappa R(V) + (1 - kappa) R(v) + (1 + theta) int I' S_Q, evaluated by hand
// for a contract given as disjoint full-coverage layers.
double layered_objective(const std::vector<std::pair<double, double>>& layers, double kappa,
                         double theta, double Vu, double Vl) {
  auto I = [&](double x) {
    double s = 0.0;
    for (auto [a, b] : layers) s += std::clamp(x, a, b) - a;
    return s;
  };
  double prem = 0.0;
  for (auto [a, b] : layers) prem += (1 + theta) * kExp.int_surv(a, b);
  return kappa * (Vu - I(Vu)) + (1 - kappa) * (Vl - I(Vl)) + prem;
}

}  // namespace

TEST_CASE("indemnity construction") {
  const auto L = Indemnity::layer(1.0, 3.0, 10.0);
  CHECK(L(0.0) == 0.0);
  CHECK(L(2.0) == doctest::Approx(1.0));
  CHECK(L(7.0) == doctest::Approx(2.0));
  CHECK(L.slope_at(1.0) == 1.0);
  CHECK(L.slope_at(3.0) == 0.0);
  const auto P = Indemnity::from_pieces({{{1.0, 2.0, 0.5}}, {{4.0, 5.0, 1.0}}}, 10.0);
  CHECK(P(3.0) == doctest::Approx(0.5));
  CHECK(P(10.0) == doctest::Approx(1.5));
  const auto Mx = Indemnity::mix(L, Indemnity::zero(10.0), 0.25);
  CHECK(Mx(6.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Indemnity({0.0, 1.0}, {1.5}), DomainError);
  CHECK_THROWS_AS(Indemnity({0.5, 1.0}, {1.0}), DomainError);
}

TEST_CASE("expected value premium") {
  const auto u = LossDistribution::uniform(1.0);
  CHECK(expected_value_premium(Indemnity::layer(0.0, 1.0, 1.0), u, 0.0) == doctest::Approx(0.5));
  CHECK(expected_value_premium(Indemnity::zero(1.0), u, 0.3) == 0.0);
  const auto e = make_truncated_exponential(1.0, 100.0);
  const double d = std::log(1.5);
  const double ref = 1.5 * (2.0 / 3.0 - 100.0 * std::exp(-100.0) / (1 - std::exp(-100.0)));
  CHECK(expected_value_premium(Indemnity::layer(d, 100.0, 100.0), e, 0.5) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(ref == doctest::Approx(1.0));
}

TEST_CASE("thresholds") {
  const auto e = make_truncated_exponential(1.0, 100.0);
  auto t = thresholds(e, 0.5, 0.9);
  CHECK(t.d1 == doctest::Approx(std::log(1.5)).epsilon(1e-9));
  CHECK(t.d2 == doctest::Approx(std::log(5.0 / 3.0)).epsilon(1e-9));
  CHECK(t.d1 <= t.d2);
  CHECK(thresholds(e, 0.5, 0.0).d2 == 100.0);
}

TEST_CASE("net price of marginal indemnity") {
  const auto s = oracle::maxmin_layer(1.0);
  const auto b = var_bounds(s.gen, s.F0, s.alpha, s.epsilon);
  const auto t = thresholds(s.SQ, s.theta, s.kappa);
  for (double x : {b.v_upper + 0.01, 10.0, 50.0})
    CHECK(net_price_H(x, s.theta, s.kappa, s.SQ, b.v_upper, b.v_lower) >= 0.0);
  CHECK(t.d1 < b.v_lower);
  CHECK(net_price_H(t.d1 - 1e-6, s.theta, s.kappa, s.SQ, b.v_upper, b.v_lower) > 0.0);
  CHECK(net_price_H(t.d1 + 1e-6, s.theta, s.kappa, s.SQ, b.v_upper, b.v_lower) < 0.0);
  for (double x : {0.1, 1.0, 2.0, 4.0})
    CHECK(net_price_H(x, 0.5, 1.0, s.SQ, 3.5, 0.7) ==
          doctest::Approx(1.5 * kExp.surv(x) - (x <= 3.5 ? 1.0 : 0.0)));
}

TEST_CASE("layered contract on the truncated exponential benchmark") {
  double prev_top = 1e9;
  for (double k : {1.0, 2.0, 4.0}) {
    const auto sol = solve_maxmin(oracle::maxmin_layer(k));
    CHECK(sol.case_id == 4);
    CHECK(sol.d1 == doctest::Approx(0.406).epsilon(2e-3 / 0.406));
    CHECK(sol.d2 == doctest::Approx(0.511).epsilon(2e-3 / 0.511));
    CHECK(sol.v_lower == doctest::Approx(0.563).epsilon(5e-3 / 0.563));
    const auto ref = Indemnity::layer(sol.d1, sol.v_upper, 100.0);
    for (int i = 0; i <= 400; ++i) {
      const double x = 12.0 * i / 400.0;
      CHECK(sol.indemnity(x) == doctest::Approx(ref(x)).epsilon(1e-9));
    }
    CHECK(sol.indemnity(100.0) < prev_top);
    prev_top = sol.indemnity(100.0);
    CHECK(sol.objective ==
          doctest::Approx(layered_objective({{sol.d1, sol.v_upper}}, 0.9, 0.5, sol.v_upper, sol.v_lower))
              .epsilon(1e-9));
  }
}

TEST_CASE("vanishing ball recovers the limited stop-loss") {
  auto s = oracle::maxmin_layer(2.0);
  s.epsilon = 1e-12;
  const auto sol = solve_maxmin(s);
  const double q = s.F0.quantile(0.95);
  CHECK(sol.v_upper == doctest::Approx(q).epsilon(1e-3));
  CHECK(sol.v_lower == doctest::Approx(q).epsilon(1e-3));
  for (double x : {0.2, 1.0, 2.0, 3.5, 20.0})
    CHECK(sol.indemnity(x) == doctest::Approx(std::max(std::min(x, sol.v_upper) - sol.d1, 0.0)).epsilon(1e-6));
}

TEST_CASE("coverage too expensive gives the zero contract") {
  auto s = oracle::maxmin_layer(1.0);
  s.theta = 30.0;
  s.epsilon = 1e-6;
  const auto sol = solve_maxmin(s);
  CHECK(sol.v_upper <= sol.d1);
  CHECK(sol.case_id == 5);
  CHECK(sol.indemnity(100.0) == 0.0);
}

TEST_CASE("branch selection by ordering") {
  CHECK(maxmin_case(0.4, 0.5, 0.6, 0.9) == 4);
  CHECK(maxmin_case(0.4, 2.0, 0.6, 0.9) == 1);
  CHECK(maxmin_case(0.4, 0.7, 0.6, 0.9) == 2);
  CHECK(maxmin_case(0.7, 0.8, 0.6, 0.9) == 3);
  CHECK(maxmin_case(1.0, 1.1, 0.6, 0.9) == 5);
}

namespace {

std::vector<MarketScenario> scenario_family() {
  std::vector<MarketScenario> out;
  for (double k : {1.0, 2.0, 4.0})
    for (double kappa : {0.0, 0.3, 0.9, 1.0})
      for (double eps : {0.05, 0.5, 2.0}) {
        auto s = oracle::maxmin_layer(k);
        s.kappa = kappa;
        s.epsilon = eps;
        out.push_back(s);
      }
  return out;
}

}  // namespace

TEST_CASE("property: slopes in {0,1}, I(0)=0 and the marginal sign rule") {
  for (const auto& s : scenario_family()) {
    const auto sol = solve_maxmin(s);
    CHECK(sol.indemnity(0.0) == 0.0);
    for (double sl : sol.indemnity.slopes()) CHECK((sl == 0.0 || sl == 1.0));
    for (int i = 0; i < 10000; ++i) {
      const double t = 100.0 * (i + 0.5) / 10000.0;
      const double h = net_price_H(t, s.theta, s.kappa, s.SQ, sol.v_upper, sol.v_lower);
      if (h < -1e-9) CHECK(sol.indemnity.slope_at(t) == 1.0);
      if (h > 1e-9) CHECK(sol.indemnity.slope_at(t) == 0.0);
    }
  }
}

TEST_CASE("property: no random layered contract beats the solver") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& s : scenario_family()) {
    const auto sol = solve_maxmin(s);
    const double best = layered_objective(
        [&] {
          std::vector<std::pair<double, double>> L;
          const auto& bp = sol.indemnity.breakpoints();
          for (std::size_t i = 0; i + 1 < bp.size(); ++i)
            if (sol.indemnity.slopes()[i] == 1.0) L.emplace_back(bp[i], bp[i + 1]);
          return L;
        }(),
        s.kappa, s.theta, sol.v_upper, sol.v_lower);
    CHECK(best == doctest::Approx(sol.objective).epsilon(1e-9));
    for (int rep = 0; rep < 500 / 36 + 1; ++rep) {
      std::vector<double> cuts;
      const int n = 1 + static_cast<int>(U(rng) * 6);
      for (int i = 0; i < 2 * n; ++i) cuts.push_back(6.0 * U(rng) * U(rng));
      std::sort(cuts.begin(), cuts.end());
      std::vector<std::pair<double, double>> L;
      for (int i = 0; i < n; ++i)
        if (U(rng) < 0.8) L.emplace_back(cuts[2 * i], cuts[2 * i + 1]);
      CHECK(layered_objective(L, s.kappa, s.theta, sol.v_upper, sol.v_lower) >= sol.objective - 1e-8);
    }
  }
}

TEST_CASE("property: more upside penalty never raises total coverage") {
  for (double eps : {0.1, 0.5, 1.0}) {
    double prev = 1e9;
    for (double k : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
      auto s = oracle::maxmin_layer(k);
      s.epsilon = eps;
      const double top = solve_maxmin(s).indemnity(100.0);
      CHECK(top <= prev + 1e-9);
      prev = top;
    }
  }
}

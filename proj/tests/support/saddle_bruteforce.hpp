#pragma once

// Discretized saddle check for the guaranteed-VaR problem, independent of the
// robust module. The contract is a slope vector on a fixed cell partition;
// the adversary picks a quantile function q(u) >= q0(u) with
//   int B_phi(q(u), q0(u)) du <= epsilon,
// and the policyholder's risk is int gamma(u) R(q(u)) du with
// gamma(u) = g'(1-u) and R(x) = x - I(x). Both players alternate best
// responses against the running average of the opponent (fictitious play).
// Upper bound: adversary's exact response to the averaged contract through the
// budget dual. Lower bound: contract's exact response to the averaged curve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bwrisk/scenario.hpp"

namespace bwtest {

struct SaddleResult {
  double upper = 0.0;
  double lower = 0.0;
  int iterations = 0;
  std::vector<double> slopes;  // averaged contract
};

class SaddleBruteForce {
 public:
  SaddleBruteForce(const bwrisk::MarketScenario& s, double v_upper, std::vector<double> nodes,
                   double x_step = 0.05)
      : s_(s), V_(v_upper), x_(std::move(nodes)), step_(x_step) {
    const std::size_t n = x_.size() - 1;
    P_.resize(n);
    a_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      P_[i] = (1.0 + s.theta) * s.SQ.integrated_survival(x_[i], x_[i + 1]);
      a_[i] = P_[i] - (x_[i + 1] <= V_ ? x_[i + 1] - x_[i] : 0.0);
    }
    room_ = s.A - V_;
    build_u_nodes();
  }

  std::size_t cells() const { return P_.size(); }

  SaddleResult run(int max_iter, double gap_tol) {
    const std::size_t n = cells();
    std::vector<double> sbar(n, 0.0), Gbar(n, 0.0);
    // Seed the curve side with the benchmark.
    std::vector<double> q0(un_.size());
    for (std::size_t k = 0; k < un_.size(); ++k) q0[k] = q0_[k];
    Gbar = layers(q0);
    SaddleResult res;
    res.upper = std::numeric_limits<double>::infinity();
    res.lower = -std::numeric_limits<double>::infinity();
    double beta = 1.0;
    for (int t = 1; t <= max_iter; ++t) {
      double lb = 0.0;
      const std::vector<double> st = contract_response(Gbar, lb);
      res.lower = std::max(res.lower, lb);
      for (std::size_t i = 0; i < n; ++i) sbar[i] += (st[i] - sbar[i]) / t;
      std::vector<double> q;
      const double ub = curve_response(sbar, beta, q);
      if (ub < res.upper) {
        res.upper = ub;
        res.slopes = sbar;
      }
      const std::vector<double> G = layers(q);
      for (std::size_t i = 0; i < n; ++i) Gbar[i] += (G[i] - Gbar[i]) / t;
      res.iterations = t;
      if (res.upper - res.lower < gap_tol) break;
    }
    return res;
  }

  // pi(I) + sup over the ball of the distorted retained risk, for slopes s.
  double contract_value(const std::vector<double>& sl) {
    double beta = 1.0;
    std::vector<double> q;
    return curve_response(sl, beta, q);
  }

 private:
  void build_u_nodes() {
    // Gauss-Legendre panels in u between F0 at an x-grid that is dense where
    // the benchmark quantile moves quickly.
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};
    const double M = s_.M();
    std::vector<double> xs;
    const double far = x_[x_.size() - 2] + 3.0;
    for (double x = 0.0; x < std::min(M, far); x += step_) xs.push_back(x);
    for (double x = far; x < std::min(M, 40.0); x += 0.1) xs.push_back(x);
    for (double x = 40.0; x < M; x += 1.0) xs.push_back(x);
    xs.push_back(M);
    for (std::size_t p = 0; p + 1 < xs.size(); ++p) {
      const double u0 = s_.F0.cdf(xs[p]), u1 = s_.F0.cdf(xs[p + 1]);
      if (!(u1 > u0)) continue;
      for (int k = 0; k < 4; ++k) {
        const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * gx[k];
        const double gam = s_.g.dg_right(1.0 - u);
        if (gam <= 0.0) continue;
        un_.push_back(u);
        wn_.push_back(0.5 * (u1 - u0) * gw[k]);
        gn_.push_back(gam);
        q0_.push_back(s_.F0.quantile(u));
      }
    }
  }

  double B(double q, double y) const {
    const auto& G = s_.gen;
    return G.phi(q) - G.phi(y) - G.dphi(y) * (q - y);
  }

  // Best q for one node given contract slopes: max gam R(q) - beta B(q, q0).
  double best_q(double gam, double q0, double beta, const std::vector<double>& sl,
                const std::vector<double>& Icum, double& val) const {
    const std::size_t n = sl.size();
    std::size_t i0 = std::upper_bound(x_.begin(), x_.end(), q0) - x_.begin();
    i0 = i0 == 0 ? 0 : std::min(i0 - 1, n - 1);
    auto R = [&](double q, std::size_t i) { return q - (Icum[i] + sl[i] * (q - x_[i])); };
    const double dq0 = s_.gen.dphi(q0);
    const double qfree = s_.gen.dphi_inverse(dq0 + gam / beta);
    double best_q = q0;
    double best = gam * R(q0, i0);
    const double R0 = best;
    for (std::size_t i = i0; i < n; ++i) {
      const double lo = std::max(x_[i], q0), hi = x_[i + 1];
      if (lo > qfree) {
        // Bound using slope one from q0 onward.
        const double bound = R0 + gam * (lo - q0) - beta * B(lo, q0);
        if (bound < best) break;
      }
      const double r = 1.0 - sl[i];
      double q = r > 0 ? s_.gen.dphi_inverse(dq0 + gam * r / beta) : lo;
      q = std::clamp(q, lo, hi);
      for (double c : {q, hi}) {
        const double h = gam * R(c, i) - beta * B(c, q0);
        if (h > best || (h == best && c > best_q)) {
          best = h;
          best_q = c;
        }
      }
    }
    val = best;
    return best_q;
  }

  std::vector<double> cumulative(const std::vector<double>& sl) const {
    std::vector<double> I(sl.size() + 1, 0.0);
    for (std::size_t i = 0; i < sl.size(); ++i) I[i + 1] = I[i] + sl[i] * (x_[i + 1] - x_[i]);
    return I;
  }

  // Dual of the adversary's problem; returns pi + value and the primal curve.
  struct Sweep {
    double dual = 0.0;
    double used = 0.0;
    std::vector<double> q;
  };

  Sweep sweep(double beta, const std::vector<double>& sl, const std::vector<double>& Icum) const {
    Sweep out;
    out.dual = beta * s_.epsilon;
    out.q.resize(un_.size());
    for (std::size_t k = 0; k < un_.size(); ++k) {
      double v = 0.0;
      out.q[k] = best_q(gn_[k], q0_[k], beta, sl, Icum, v);
      out.dual += wn_[k] * v;
      out.used += wn_[k] * B(out.q[k], q0_[k]);
    }
    return out;
  }

  // Adversary's exact response through the budget dual. D(beta) bounds the
  // constrained maximum for every beta, and D' = epsilon - used, so beta* is the
  // root of the budget usage. Returns pi + min D and a feasible curve near it.
  double curve_response(const std::vector<double>& sl, double& beta_io, std::vector<double>& q) {
    const std::vector<double> Icum = cumulative(sl);
    const double eps = s_.epsilon;
    double best = std::numeric_limits<double>::infinity();
    auto at = [&](double lb) {
      Sweep r = sweep(std::exp(lb), sl, Icum);
      best = std::min(best, r.dual);
      return r;
    };
    double lo = std::log(beta_io) - 0.02, hi = lo + 0.04;
    Sweep slo = at(lo), shi = at(hi);
    for (double step = 0.1; slo.used <= eps; step *= 2.0) {
      hi = lo;
      shi = std::move(slo);
      lo -= step;
      slo = at(lo);
    }
    for (double step = 0.1; shi.used > eps; step *= 2.0) {
      lo = hi;
      slo = std::move(shi);
      hi += step;
      shi = at(hi);
    }
    double flo = slo.used - eps, fhi = shi.used - eps;
    int side = 0;
    for (int it = 0; it < 60 && hi - lo > 1e-5 && fhi < -1e-12 * eps; ++it) {
      const double m = std::clamp(hi - fhi * (hi - lo) / (fhi - flo), lo + 1e-3 * (hi - lo),
                                  hi - 1e-3 * (hi - lo));
      Sweep sm = at(m);
      const double fm = sm.used - eps;
      if (fm > 0) {
        lo = m;
        flo = fm;
        slo = std::move(sm);
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = m;
        fhi = fm;
        shi = std::move(sm);
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    beta_io = std::exp(hi);
    q = shi.q;
    if (fhi < -1e-12 * eps) {
      // The response jumps at beta*; blend the two sides into a feasible curve.
      double a = 0.0, b = 1.0;
      std::vector<double> mix(q.size());
      auto blend = [&](double w) {
        for (std::size_t k = 0; k < q.size(); ++k) mix[k] = w * slo.q[k] + (1.0 - w) * shi.q[k];
        return budget(mix);
      };
      for (int it = 0; it < 50; ++it) {
        const double w = 0.5 * (a + b);
        (blend(w) <= eps ? a : b) = w;
      }
      blend(a);
      q = mix;
    }
    double premium = 0.0;
    for (std::size_t i = 0; i < sl.size(); ++i) premium += sl[i] * P_[i];
    return premium + best;
  }

  double budget(const std::vector<double>& q) const {
    double b = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) b += wn_[k] * B(q[k], q0_[k]);
    return b;
  }

  // Distorted layer integrals int_{cell} g(S(x)) dx of the curve q.
  std::vector<double> layers(const std::vector<double>& q) const {
    std::vector<double> G(cells(), 0.0);
    for (std::size_t k = 0; k < un_.size(); ++k) {
      const double w = wn_[k] * gn_[k];
      for (std::size_t i = 0; i < cells() && x_[i] < q[k]; ++i)
        G[i] += w * (std::min(q[k], x_[i + 1]) - x_[i]);
    }
    return G;
  }

  // min sum s_i (P_i - G_i) + sum G_i subject to a.s <= room, s in [0,1].
  std::vector<double> contract_response(const std::vector<double>& G, double& value) const {
    const std::size_t n = cells();
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = P_[i] - G[i];
    auto pick = [&](double mu, bool feasible_ties) {
      std::vector<double> sl(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double r = c[i] + mu * a_[i];
        const bool tie = std::abs(r) <= 1e-12 * (std::abs(c[i]) + std::abs(mu * a_[i]));
        if (tie ? (feasible_ties ? a_[i] < 0 : a_[i] > 0 || c[i] < 0) : r < 0) sl[i] = 1.0;
      }
      return sl;
    };
    auto load = [&](const std::vector<double>& sl) {
      double t = 0.0;
      for (std::size_t i = 0; i < n; ++i) t += a_[i] * sl[i];
      return t;
    };
    std::vector<double> sl = pick(0.0, false);
    if (load(sl) > room_) {
      std::vector<double> mus;
      for (std::size_t i = 0; i < n; ++i)
        if (a_[i] != 0 && -c[i] / a_[i] > 0) mus.push_back(-c[i] / a_[i]);
      std::sort(mus.begin(), mus.end());
      std::size_t j = 0;
      while (j < mus.size() && load(pick(mus[j], true)) > room_) ++j;
      if (j == mus.size()) {
        sl = pick(mus.empty() ? 0.0 : mus.back() * 2 + 1, true);
      } else {
        const std::vector<double> hi = pick(mus[j], true);   // feasible
        const std::vector<double> lo = pick(mus[j], false);  // infeasible side
        const double lh = load(hi), ll = load(lo);
        const double w = ll > lh ? std::clamp((room_ - lh) / (ll - lh), 0.0, 1.0) : 0.0;
        sl.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) sl[i] = w * lo[i] + (1 - w) * hi[i];
      }
    }
    value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += sl[i] * c[i] + G[i];
    return sl;
  }

  bwrisk::MarketScenario s_;
  double V_;
  std::vector<double> x_;
  std::vector<double> P_, a_;
  double step_;
  double room_ = 0.0;
  std::vector<double> un_, wn_, gn_, q0_;
};

}  // namespace bwtest

#include "bwrisk/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "bwrisk/errors.hpp"
#include "bwrisk/numerics.hpp"
#include "bwrisk/var_bounds.hpp"

namespace bwrisk {

bool IntervalSet::contains(double x) const {
  for (const auto& [a, b] : parts)
    if (a <= x && x < b) return true;
  return false;
}

bool IntervalSet::contains_left(double x) const {
  for (const auto& [a, b] : parts)
    if (a < x && x <= b) return true;
  return false;
}

double IntervalSet::length() const {
  double s = 0.0;
  for (const auto& [a, b] : parts) s += b - a;
  return s;
}

RobustContext::RobustContext(const MarketScenario& scn)
    : RobustContext(scn, worst_case_var(scn.gen, scn.F0, scn.alpha, scn.epsilon,
                                        scn.numerics.tol * scn.M())) {}

RobustContext::RobustContext(const MarketScenario& scn, double v_upper)
    : scn_(scn),
      kernel_(std::make_shared<BudgetKernel>(scn.gen, scn.F0, scn.numerics.table_size)),
      v_upper_(v_upper),
      zeta_(kernel_->zeta(scn.epsilon)) {}

double net_price_value(double x, double s, double lambda, const MarketScenario& scn,
                       double v_upper) {
  double h = (1.0 + lambda) * (1.0 + scn.theta) * scn.SQ.survival(x) - scn.g.g(s);
  if (x <= v_upper) h -= lambda;
  return h;
}

double net_price(double x, const SurvivalCurve& S, double lambda, const MarketScenario& scn,
                 double v_upper) {
  return net_price_value(x, S(x), lambda, scn, v_upper);
}

namespace {

// Splits [lo, hi) into {f >= -tol} and its complement by sampling and bisection.
std::pair<IntervalSet, IntervalSet> split_by_sign(const std::function<double(double)>& f,
                                                  double lo, double hi, int n,
                                                  const std::vector<double>& extra) {
  IntervalSet pos, neg;
  if (!(hi > lo)) return {pos, neg};
  const double tol = 1e-12;
  auto is_pos = [&](double x) { return f(x) >= -tol; };
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * i / n);
  for (double e : extra)
    if (e > lo && e < hi) xs.push_back(e);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double start = lo;
  bool cur = is_pos(lo);
  const double w = 1e-13 * std::max(1.0, hi);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const bool c = is_pos(xs[i]);
    if (c == cur) continue;
    const double cut = num::bisect_first_true([&](double x) { return is_pos(x) != cur; },
                                              xs[i - 1], xs[i], w);
    (cur ? pos : neg).parts.emplace_back(start, cut);
    start = cut;
    cur = c;
  }
  (cur ? pos : neg).parts.emplace_back(start, hi);
  return {pos, neg};
}

double ghat_impl(double x, double s0, double beta, const MarketScenario& scn) {
  if (s0 >= 1.0) return 1.0;
  if (beta <= 0.0) return std::max(std::min(scn.g.ginv(1.0), 1.0), s0);
  const double dx = scn.gen.dphi(x);
  auto kprime_nonpos = [&](double t) {
    if (t >= 1.0) return true;
    const double y = scn.F0.quantile(1.0 - t);
    return scn.g.dg_right(t) - beta * (dx - scn.gen.dphi(y)) <= 0.0;
  };
  if (kprime_nonpos(s0)) return s0;
  return num::bisect_first_true(kprime_nonpos, s0, 1.0, 1e-14);
}

double gstar_impl(double x, bool left, double beta, double lambda, const MarketScenario& scn,
                  double V, const RegionPartition& part) {
  const double M = scn.M();
  x = std::clamp(x, 0.0, M);
  const double s0 = left && x > 0 ? scn.F0.survival_left(x) : scn.F0.survival(x);
  const double sq = left && x > 0 ? scn.SQ.survival_left(x) : scn.SQ.survival(x);
  const double k = (1.0 + lambda) * (1.0 + scn.theta);
  auto in = [&](const IntervalSet& s) {
    return (left || x >= M) ? s.contains_left(x) : s.contains(x);
  };
  const bool before_x1 = left ? x <= part.x1 : x < part.x1;
  const bool before_v = left ? x <= V : x < V;
  const bool before_x2 = left ? x <= part.x2 : x < part.x2;
  if (before_x1) return ghat_impl(x, s0, beta, scn);
  if (before_v) {
    if (!in(part.A1)) return s0;
    return std::max(s0, std::min(ghat_impl(x, s0, beta, scn), scn.g.ginv(k * sq - lambda)));
  }
  if (before_x2) return ghat_impl(x, s0, beta, scn);
  if (!in(part.A2)) return s0;
  return std::max(s0, std::min(ghat_impl(x, s0, beta, scn), scn.g.ginv(k * sq)));
}

// Abscissae where G* may change formula.
std::vector<double> key_points(double beta, const MarketScenario& scn, double V,
                               const RegionPartition& part) {
  const double M = scn.M();
  std::vector<double> keys{0.0, M, V, part.x1, part.x2};
  for (const IntervalSet* s : {&part.A1, &part.B1, &part.A2, &part.B2})
    for (const auto& [a, b] : s->parts) {
      keys.push_back(a);
      keys.push_back(b);
    }
  for (double b : scn.F0.x_breaks()) keys.push_back(b);
  for (double b : scn.SQ.x_breaks()) keys.push_back(b);
  for (double b : scn.gen.kinks) keys.push_back(b);
  for (double kink : scn.g.kinks) {
    if (!(kink > 0 && kink < 1)) continue;
    const double xt = scn.F0.quantile(1.0 - kink);
    keys.push_back(xt);
    if (beta > 0) {
      const double slope = scn.g.dg_right(kink * (1.0 - 1e-12));
      keys.push_back(scn.gen.dphi_inverse(scn.gen.dphi(xt) + slope / beta));
    }
  }
  std::vector<double> out;
  for (double k : keys)
    if (k >= 0 && k <= M && std::isfinite(k)) out.push_back(k);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Engine {
  const RobustContext& ctx;
  const MarketScenario& s;
  const BudgetKernel& K;
  double V, lambda, kfac, M;
  RegionPartition part;

  Engine(const RobustContext& c, double lam)
      : ctx(c),
        s(c.scenario()),
        K(c.kernel()),
        V(c.v_upper()),
        lambda(lam),
        kfac((1.0 + lam) * (1.0 + c.scenario().theta)),
        M(c.scenario().M()),
        part(region_partition(c.scenario(), lam, c.v_upper())) {}

  double cval(double x) const { return kfac * s.SQ.survival(x) - (x <= V ? lambda : 0.0); }

  struct Tab {
    double beta = 0.0;
    std::vector<double> x, v, cphi, cj;
    std::size_t iVl = 0, iVr = 0;
  };

  double seg_phi(double x0, double x1, double v0, double v1, double a, double b) const {
    if (!(b > a)) return 0.0;
    const double sl = x1 > x0 ? (v1 - v0) / (x1 - x0) : 0.0;
    return num::gauss_legendre8(
        [&](double x) { return std::min(s.g.g(v0 + sl * (x - x0)), cval(x)); }, a, b);
  }
  double seg_j(double x0, double x1, double v0, double v1, double a, double b) const {
    if (!(b > a)) return 0.0;
    const double sl = x1 > x0 ? (v1 - v0) / (x1 - x0) : 0.0;
    return num::gauss_legendre8([&](double x) { return K.j(v0 + sl * (x - x0), x); }, a, b);
  }

  Tab tabulate(double beta) const {
    struct P {
      double x, vl, vr;
    };
    const std::vector<double> keys = key_points(beta, s, V, part);
    std::vector<double> xs = keys;
    const int nu = 1000, nq = 1000;
    for (int i = 1; i < nu; ++i) xs.push_back(M * i / nu);
    for (int i = 1; i < nq; ++i) xs.push_back(s.F0.quantile(double(i) / nq));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<P> pts;
    pts.reserve(xs.size() * 3);
    auto gs = [&](double x) { return gstar_impl(x, false, beta, lambda, s, V, part); };
    for (double x : xs) {
      const double vr = gs(x);
      double vl = vr;
      if (x > 0 && std::binary_search(keys.begin(), keys.end(), x))
        vl = gstar_impl(x, true, beta, lambda, s, V, part);
      pts.push_back({x, vl, vr});
    }
    // Refine cells where linear interpolation misses the midpoint value.
    std::vector<P> out;
    out.reserve(pts.size() * 2);
    std::function<void(const P&, const P&, int)> refine = [&](const P& a, const P& b, int depth) {
      const double m = 0.5 * (a.x + b.x);
      if (depth <= 0 || !(m > a.x && m < b.x)) return;
      const double vm = gs(m);
      if (std::abs(vm - 0.5 * (a.vr + b.vl)) <= 1e-7) return;
      P pm{m, vm, vm};
      refine(a, pm, depth - 1);
      out.push_back(pm);
      refine(pm, b, depth - 1);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) refine(pts[i - 1], pts[i], 24);
      out.push_back(pts[i]);
    }
    Tab t;
    t.beta = beta;
    for (const P& p : out) {
      const bool split = p.x > 0 && (p.vl != p.vr || p.x == V);
      if (split) {
        if (p.x == V) t.iVl = t.x.size();
        t.x.push_back(p.x);
        t.v.push_back(p.vl);
      }
      if (p.x == V && !split) t.iVl = t.x.size();
      if (p.x == V) t.iVr = t.x.size();
      t.x.push_back(p.x);
      t.v.push_back(p.vr);
    }
    const std::size_t n = t.x.size();
    t.cphi.assign(n, 0.0);
    t.cj.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = t.x[i], b = t.x[i + 1];
      t.cphi[i + 1] = t.cphi[i] + seg_phi(a, b, t.v[i], t.v[i + 1], a, b);
      t.cj[i + 1] = t.cj[i] + seg_j(a, b, t.v[i], t.v[i + 1], a, b);
    }
    return t;
  }

  // int_lo^hi min(level, kfac S_Q(x) - shift) dx
  double int_min_c(double lo, double hi, double level, double shift) const {
    if (!(hi > lo)) return 0.0;
    const double p = (level + shift) / kfac;
    double xs;  // sup{x : kfac S_Q(x) - shift >= level}
    if (p <= 0.0)
      xs = M;
    else if (p > s.SQ.survival(0.0))
      xs = 0.0;
    else
      xs = s.SQ.upper_quantile(1.0 - p);
    const double mid = std::clamp(xs, lo, hi);
    return level * (mid - lo) + kfac * s.SQ.integrated_survival(mid, hi) - shift * (hi - mid);
  }

  struct BEval {
    double b = 0.0, a1 = 0.0, a2 = 0.0, phi = 0.0, J = 0.0;
  };

  BEval eval_b(const Tab& t, double b) const {
    BEval r;
    r.b = b;
    const std::size_t n = t.x.size();
    // a1 on the left part [0, iVl].
    double pre_phi = 0.0, pre_j = 0.0;
    {
      std::size_t p = std::partition_point(t.v.begin(), t.v.begin() + t.iVl + 1,
                                           [&](double v) { return v >= b; }) -
                      t.v.begin();
      if (p == 0) {
        r.a1 = 0.0;
      } else if (p > t.iVl) {
        r.a1 = V;
        pre_phi = t.cphi[t.iVl];
        pre_j = t.cj[t.iVl];
      } else {
        const std::size_t i = p - 1;
        const double x0 = t.x[i], x1 = t.x[p], v0 = t.v[i], v1 = t.v[p];
        r.a1 = (x1 == x0 || v0 == v1) ? x0 : std::clamp(x0 + (v0 - b) / (v0 - v1) * (x1 - x0), x0, x1);
        pre_phi = t.cphi[i] + seg_phi(x0, x1, v0, v1, x0, r.a1);
        pre_j = t.cj[i] + seg_j(x0, x1, v0, v1, x0, r.a1);
      }
    }
    double suf_phi = 0.0, suf_j = 0.0;
    {
      if (t.v[t.iVr] < b) {
        r.a2 = V;
        suf_phi = t.cphi[n - 1] - t.cphi[t.iVr];
        suf_j = t.cj[n - 1] - t.cj[t.iVr];
      } else {
        std::size_t p = std::partition_point(t.v.begin() + t.iVr, t.v.end(),
                                             [&](double v) { return v >= b; }) -
                        t.v.begin();
        if (p >= n) {
          r.a2 = M;
        } else {
          const std::size_t i = p - 1;
          const double x0 = t.x[i], x1 = t.x[p], v0 = t.v[i], v1 = t.v[p];
          r.a2 = (x1 == x0 || v0 == v1) ? x1 : std::clamp(x0 + (v0 - b) / (v0 - v1) * (x1 - x0), x0, x1);
          suf_phi = t.cphi[n - 1] - t.cphi[p] + seg_phi(x0, x1, v0, v1, r.a2, x1);
          suf_j = t.cj[n - 1] - t.cj[p] + seg_j(x0, x1, v0, v1, r.a2, x1);
        }
      }
    }
    const double gb = s.g.g(b);
    const double flat_phi = int_min_c(r.a1, std::min(r.a2, V), gb, lambda) +
                            int_min_c(std::max(r.a1, V), r.a2, gb, 0.0);
    const double flat_j = b * K.int_dphi(r.a1, r.a2) - K.C(b) * (r.a2 - r.a1);
    r.phi = pre_phi + flat_phi + suf_phi;
    r.J = pre_j + flat_j + suf_j;
    return r;
  }

  BEval best_b(const Tab& t, double beta) const {
    const double lo = t.v[t.iVl], hi = t.v[t.iVr];
    if (!(hi > lo)) return eval_b(t, hi);
    auto score = [&](const BEval& e) { return e.phi - beta * e.J; };
    BEval best = eval_b(t, lo);
    auto consider = [&](const BEval& e) {
      const double se = score(e), sb = score(best);
      const double tie = 1e-13 * (1.0 + std::abs(sb));
      if (se > sb + tie || (std::abs(se - sb) <= tie && e.b < best.b)) best = e;
    };
    for (int i = 1; i < 64; ++i) consider(eval_b(t, lo + (hi - lo) * i / 63.0));
    const auto g = num::golden_max([&](double b) { return score(eval_b(t, b)); }, lo, hi,
                                   1e-12 * std::max(1.0, hi));
    consider(eval_b(t, g.x));
    return best;
  }

  double gstar_exact(double x, double beta) const {
    return gstar_impl(x, false, beta, lambda, s, V, part);
  }
};

SurvivalCurve build_modified(const SurvivalCurve& G, double b, double a1, double a2, double V) {
  const auto& x = G.grid();
  const auto& v = G.values();
  std::vector<double> ox, ov;
  for (std::size_t i = 0; i < x.size() && x[i] < a1; ++i) {
    ox.push_back(x[i]);
    ov.push_back(v[i]);
  }
  if (a1 > 0) {
    ox.push_back(a1);
    ov.push_back(std::max(G.left(a1), b));
  }
  ox.push_back(a1);
  ov.push_back(b);
  const double end = std::max(a2, V);
  if (end > a1) {
    ox.push_back(end);
    ov.push_back(b);
  }
  const double M = G.support_max();
  if (end < M) {
    ox.push_back(end);
    ov.push_back(std::min(G.tabulated(end), b));
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > end) {
        ox.push_back(x[i]);
        ov.push_back(v[i]);
      }
  }
  return SurvivalCurve(ox, ov);
}

}  // namespace

RegionPartition region_partition(const MarketScenario& scn, double lambda, double V) {
  if (!(lambda >= 0)) throw DomainError("region_partition: lambda must be nonnegative");
  const double M = scn.M();
  RegionPartition p;
  p.v_upper = V;
  p.lambda = lambda;
  const double k = (1.0 + lambda) * (1.0 + scn.theta);
  const double p1 = 1.0 / (1.0 + scn.theta);
  p.x1 = scn.SQ.survival(0.0) < p1 ? 0.0 : std::min(V, scn.SQ.upper_quantile(1.0 - p1));
  const double p2 = 1.0 / k;
  p.x2 = scn.SQ.survival(std::min(V, M)) < p2 ? V : std::max(V, std::min(M, scn.SQ.upper_quantile(1.0 - p2)));
  // Regions right of V use the right limit of the indicator, so that G*(V)
  // is the value just beyond V.
  auto H0 = [&](double x) {
    const double h = net_price_value(x, scn.F0.survival(x), lambda, scn, V);
    return x == V ? h + lambda : h;
  };
  std::vector<double> extra = scn.SQ.x_breaks();
  for (double b : scn.F0.x_breaks()) extra.push_back(b);
  for (double kink : scn.g.kinks)
    if (kink > 0 && kink < 1) extra.push_back(scn.F0.quantile(1.0 - kink));
  const int n = std::max(100, scn.numerics.grid);
  std::tie(p.A1, p.B1) = split_by_sign(H0, p.x1, V, n, extra);
  std::tie(p.A2, p.B2) = split_by_sign(H0, p.x2, M, n, extra);
  // The last region is closed at M.
  return p;
}

double g_hat(double x, double beta, const MarketScenario& scn) {
  if (!(beta >= 0)) throw DomainError("g_hat: beta must be nonnegative");
  return ghat_impl(x, scn.F0.survival(x), beta, scn);
}

double g_star(double x, double beta, double lambda, const MarketScenario& scn, double V,
              const RegionPartition& part) {
  return gstar_impl(x, false, beta, lambda, scn, V, part);
}

double g_star_left(double x, double beta, double lambda, const MarketScenario& scn, double V,
                   const RegionPartition& part) {
  return gstar_impl(x, true, beta, lambda, scn, V, part);
}

SurvivalCurve g_star_curve(double beta, double lambda, const MarketScenario& scn, double V,
                           const RegionPartition& part) {
  RobustContext ctx(scn, V);
  Engine e(ctx, lambda);
  e.part = part;
  const auto t = e.tabulate(beta);
  SurvivalCurve c(t.x, t.v);
  c.attach_exact([scn, beta, lambda, V, part](double x) {
    return gstar_impl(x, false, beta, lambda, scn, V, part);
  });
  return c;
}

std::pair<double, double> admissible_b(const SurvivalCurve& G, double V) {
  const double lo = G.left(V), hi = G.tabulated(V);
  if (lo < hi) return {lo, hi};
  return {hi, hi};
}

SurvivalCurve modified_survival(const SurvivalCurve& G, double b, double V) {
  const auto [lo, hi] = admissible_b(G, V);
  const double tol = 1e-12;
  if (b < lo - tol || b > hi + tol)
    throw DomainError("modified_survival: b outside the admissible interval");
  b = std::clamp(b, lo, hi);
  // a1 = sup{x < V : G(x) >= b}, a2 = sup{x >= V : G(x) >= b}
  const auto& x = G.grid();
  const auto& v = G.values();
  double a1 = 0.0, a2 = V;
  for (std::size_t i = 0; i < x.size() && x[i] < V; ++i) {
    if (v[i] >= b) {
      a1 = x[i];
      const double xn = i + 1 < x.size() ? x[i + 1] : x[i];
      const double vn = i + 1 < x.size() ? (xn < V ? v[i + 1] : G.left(V)) : v[i];
      if (vn >= b)
        a1 = std::min(xn, V);
      else if (xn > x[i])
        a1 = x[i] + (v[i] - b) / (v[i] - vn) * (xn - x[i]);
    }
  }
  if (G.tabulated(V) >= b) {
    a2 = V;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < V || v[i] < b) continue;
      if (x[i] == V && i + 1 < x.size() && x[i + 1] == V) continue;
      a2 = x[i];
      if (i + 1 < x.size()) {
        const double xn = x[i + 1], vn = v[i + 1];
        if (vn >= b)
          a2 = xn;
        else if (xn > x[i])
          a2 = x[i] + (v[i] - b) / (v[i] - vn) * (xn - x[i]);
      } else {
        a2 = G.support_max();
      }
    }
  }
  SurvivalCurve out = build_modified(G, b, a1, a2, V);
  if (G.has_exact()) {
    const SurvivalCurve g = G;
    out.attach_exact([g, b, a1, a2, V](double x) {
      if (x >= a1 && x < std::max(a2, V)) return b;
      return g(x);
    });
  }
  return out;
}

double budget_functional(const BudgetKernel& K, const SurvivalCurve& S) {
  const auto& x = S.grid();
  const auto& v = S.values();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i])) continue;
    const double sl = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
    s += num::gauss_legendre8([&](double t) { return K.j(v[i] + sl * (t - x[i]), t); }, x[i],
                              x[i + 1]);
  }
  // Beyond the last knot the curve is constant.
  const double M = K.M();
  if (x.back() < M) s += v.back() * K.int_dphi(x.back(), M) - K.C(v.back()) * (M - x.back());
  return s;
}

double lagrangian(const RobustContext& ctx, const SurvivalCurve& S, double lambda, double beta) {
  const auto& scn = ctx.scenario();
  const double V = ctx.v_upper();
  const double k = (1.0 + lambda) * (1.0 + scn.theta);
  auto c = [&](double x) { return k * scn.SQ.survival(x) - (x <= V ? lambda : 0.0); };
  const auto& x = S.grid();
  const auto& v = S.values();
  double phi = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i])) continue;
    const double sl = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
    auto f = [&](double t) { return std::min(scn.g.g(v[i] + sl * (t - x[i])), c(t)); };
    if (x[i] < V && V < x[i + 1])
      phi += num::gauss_legendre8(f, x[i], V) + num::gauss_legendre8(f, V, x[i + 1]);
    else
      phi += num::gauss_legendre8(f, x[i], x[i + 1]);
  }
  return phi - beta * budget_functional(ctx.kernel(), S);
}

double psi(double beta, double lambda, const MarketScenario& scn) {
  if (!(beta >= 0)) throw DomainError("psi: beta must be nonnegative");
  RobustContext ctx(scn);
  Engine e(ctx, lambda);
  const auto t = e.tabulate(beta);
  return e.best_b(t, beta).J;
}

InnerSolution solve_inner(double lambda, const MarketScenario& scn) {
  RobustContext ctx(scn);
  return solve_inner(lambda, ctx);
}

InnerSolution solve_inner(double lambda, const RobustContext& ctx, double beta_hint) {
  if (!(lambda >= 0)) throw DomainError("solve_inner: lambda must be nonnegative");
  Engine e(ctx, lambda);
  const double zeta = ctx.zeta();
  InnerSolution sol;
  sol.zeta = zeta;
  sol.partition = e.part;

  struct Eval {
    double beta;
    Engine::Tab tab;
    Engine::BEval be;
  };
  auto evaluate = [&](double beta) {
    Eval ev{beta, e.tabulate(beta), {}};
    ev.be = e.best_b(ev.tab, beta);
    return ev;
  };

  Eval best = evaluate(0.0);
  if (best.be.J > zeta) {
    Eval lo = best;
    const bool hinted = beta_hint > 0 && std::isfinite(beta_hint);
    const double step = hinted ? 1.25 : 2.0;
    double beta = hinted ? beta_hint : 1.0;
    Eval hi = evaluate(beta);
    if (hinted && hi.be.J <= zeta) {
      for (int i = 0; i < 60; ++i) {
        Eval m = evaluate(hi.beta / step);
        if (m.be.J > zeta) {
          lo = std::move(m);
          break;
        }
        hi = std::move(m);
      }
    }
    int expand = 0;
    while (hi.be.J > zeta) {
      if (hi.be.J > lo.be.J + 1e-12)
        sol.diagnostics.push_back("psi increased between beta=" + std::to_string(lo.beta) +
                                  " and beta=" + std::to_string(hi.beta));
      lo = std::move(hi);
      beta *= step;
      if (++expand > 200) {
        std::ostringstream os;
        os << "solve_inner: no beta with psi <= zeta (lambda=" << lambda << ", last beta=" << lo.beta
           << ", psi=" << lo.be.J << ", zeta=" << zeta << ")";
        throw NumericalError(os.str(), lo.be.J);
      }
      hi = evaluate(beta);
    }
    // Illinois-modified regula falsi on psi - zeta, keeping the feasible side.
    double flo = lo.be.J - zeta, fhi = hi.be.J - zeta;
    const double ftol = 1e-10 * std::max(1.0, std::abs(zeta));
    int side = 0;
    for (int it = 0; it < 200 && fhi < -ftol; ++it) {
      if (hi.beta - lo.beta <= 1e-14 * hi.beta) break;
      double b = (lo.beta * fhi - hi.beta * flo) / (fhi - flo);
      if (!(b > lo.beta && b < hi.beta)) b = 0.5 * (lo.beta + hi.beta);
      // Guard against stalls on a flat or jumping psi.
      if (it % 8 == 7) b = 0.5 * (lo.beta + hi.beta);
      Eval m = evaluate(b);
      const double fm = m.be.J - zeta;
      if (fm > 0) {
        lo = std::move(m);
        flo = fm;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = std::move(m);
        fhi = fm;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    best = std::move(hi);
    if (std::abs(best.be.J - zeta) > 1e-6 * std::max(1.0, std::abs(zeta)))
      sol.diagnostics.push_back("psi(beta*) - zeta = " + std::to_string(best.be.J - zeta) +
                                " (psi discontinuous in beta)");
  }
  sol.beta_star = best.beta;
  sol.b_star = best.be.b;
  sol.a1 = best.be.a1;
  sol.a2 = best.be.a2;
  sol.psi = best.be.J;
  sol.value = best.be.phi;
  sol.lagrangian = best.be.phi - best.beta * best.be.J;
  SurvivalCurve G(best.tab.x, best.tab.v);
  sol.curve = build_modified(G, best.be.b, best.be.a1, best.be.a2, ctx.v_upper());
  {
    const double b = best.be.b, a1 = best.be.a1, a2 = best.be.a2, V = ctx.v_upper();
    const double beta = best.beta;
    const MarketScenario scn = ctx.scenario();
    const RegionPartition part = e.part;
    sol.curve.attach_exact([scn, part, b, a1, a2, V, beta, lambda](double x) {
      if (x >= a1 && x < std::max(a2, V)) return b;
      return gstar_impl(x, false, beta, lambda, scn, V, part);
    });
  }
  return sol;
}

Indemnity indemnity_from_survival(const SurvivalCurve& S, double lambda,
                                  const MarketScenario& scn, double V, double eta_tilde,
                                  const std::vector<double>& extra_breaks) {
  if (!(eta_tilde >= 0 && eta_tilde <= 1))
    throw DomainError("indemnity_from_survival: eta_tilde must lie in [0,1]");
  std::vector<double> extra = extra_breaks;
  extra.push_back(V);
  for (double b : scn.SQ.x_breaks()) extra.push_back(b);
  // H relative to the size of its terms, so the zero set is found in the far
  // tail as well.
  const double k = (1.0 + lambda) * (1.0 + scn.theta);
  auto rel = [&](double x) {
    const double s = S(x);
    const double h = net_price_value(x, s, lambda, scn, V);
    const double scale = k * scn.SQ.survival(x) + scn.g.g(s) + (x <= V ? lambda : 0.0);
    return scale > 0.0 ? h / scale : h;
  };
  return indemnity_from_sign(rel, scn.M(), eta_tilde, scn.numerics.grid, extra, 1e-10);
}

double constraint_residual(const Indemnity& I, const MarketScenario& scn, double V) {
  return expected_value_premium(I, scn.SQ, scn.theta) - I(V) - (scn.A - V);
}

double assumption1_minimum(const MarketScenario& scn, double V) {
  const double d1 = scn.SQ.quantile(std::clamp(1.0 - 1.0 / (1.0 + scn.theta), 1e-300, 1.0));
  if (d1 >= V) return 0.0;
  return (1.0 + scn.theta) * scn.SQ.integrated_survival(d1, V) - (V - d1);
}

namespace {

struct LambdaEval {
  double lambda;
  InnerSolution inner;
  Indemnity I0, I1;
  double r0, r1;
  double rmax() const { return std::max(r0, r1); }
  double rmin() const { return std::min(r0, r1); }
};

LambdaEval eval_lambda(double lambda, const RobustContext& ctx, double beta_hint = 0.0) {
  const auto& scn = ctx.scenario();
  const double V = ctx.v_upper();
  LambdaEval ev{lambda, solve_inner(lambda, ctx, beta_hint), {}, {}, 0, 0};
  std::vector<double> extra{ev.inner.a1, ev.inner.a2, ev.inner.partition.x1,
                            ev.inner.partition.x2};
  for (const IntervalSet* s : {&ev.inner.partition.A1, &ev.inner.partition.A2})
    for (const auto& [a, b] : s->parts) {
      extra.push_back(a);
      extra.push_back(b);
    }
  ev.I0 = indemnity_from_survival(ev.inner.curve, lambda, scn, V, 0.0, extra);
  ev.I1 = indemnity_from_survival(ev.inner.curve, lambda, scn, V, 1.0, extra);
  ev.r0 = constraint_residual(ev.I0, scn, V);
  ev.r1 = constraint_residual(ev.I1, scn, V);
  return ev;
}

double zero_set_length(const Indemnity& I0, const Indemnity& I1) {
  double s = 0.0;
  const auto& bp = I1.breakpoints();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double m = 0.5 * (bp[i] + bp[i + 1]);
    if (I1.slope_at(m) != I0.slope_at(m)) s += bp[i + 1] - bp[i];
  }
  return s;
}

}  // namespace

RobustSolution solve_problem2(const MarketScenario& scn) {
  if (!std::isfinite(scn.A)) throw DomainError("solve_problem2: A is required");
  RobustContext ctx(scn);
  const double V = ctx.v_upper();
  RobustSolution sol;
  sol.v_upper = V;
  sol.zeta = ctx.zeta();
  const double amin = assumption1_minimum(scn, V);
  if (amin > scn.A - V + 1e-12) {
    std::ostringstream os;
    os << "infeasible: min over contracts of pi(I) - I(V) is " << amin << " > A - V = " << scn.A - V;
    throw InfeasibleError(os.str(), amin);
  }
  const double rtol = 1e-12;
  const double room = scn.A - V;
  // Dual function; concave in lambda with supergradients inside [r0, r1].
  auto dual = [&](const LambdaEval& e) { return e.inner.value - e.lambda * room; };
  LambdaEval at = eval_lambda(0.0, ctx);
  std::vector<std::string> diag;
  std::vector<LambdaEval> seen;
  Indemnity contract;
  double eta = 1.0;
  if (at.rmax() <= rtol) {
    contract = at.I1;
  } else {
    std::vector<LambdaEval> path{at};
    for (double l = 1.0;; l *= 2.0) {
      if (l > std::ldexp(1.0, 20)) {
        std::ostringstream os;
        os << "no multiplier up to 2^20 satisfies the constraint (residual " << path.back().rmax() << ")";
        throw InfeasibleError(os.str(), path.back().rmax());
      }
      LambdaEval e = eval_lambda(l, ctx, path.back().inner.beta_star);
      const bool stop = e.rmax() <= rtol || dual(e) < dual(path.back());
      path.push_back(std::move(e));
      if (stop) break;
    }
    const std::size_t n = path.size();
    double a = n >= 3 ? path[n - 3].lambda : 0.0, b = path[n - 1].lambda;
    for (auto& e : path) seen.push_back(e);
    auto eval_at = [&](double l) {
      // Warm start from the evaluated multiplier closest to l.
      double hint = 0.0, dist = std::numeric_limits<double>::infinity();
      for (const auto& e : seen)
        if (std::abs(e.lambda - l) < dist) {
          dist = std::abs(e.lambda - l);
          hint = e.inner.beta_star;
        }
      seen.push_back(eval_lambda(l, ctx, hint));
      return dual(seen.back());
    };
    std::uintmax_t iters = 60;
    boost::math::tools::brent_find_minima([&](double l) { return -eval_at(l); }, a, b, 16, iters);
    std::size_t best = 0;
    for (std::size_t i = 1; i < seen.size(); ++i)
      if (dual(seen[i]) > dual(seen[best])) best = i;
    at = seen[best];
    if (at.r0 <= rtol && at.r1 >= -rtol) {
      // Residual is affine in a constant eta on the zero set.
      eta = at.r1 != at.r0 ? std::clamp(at.r0 / (at.r0 - at.r1), 0.0, 1.0) : 1.0;
      contract = Indemnity::mix(at.I1, at.I0, eta);
    } else {
      // Residual sign does not change at the best multiplier found: combine
      // with the nearest evaluated contract on the other side.
      const bool slack_side = at.r1 < 0;
      const LambdaEval* other = nullptr;
      for (const auto& e : seen) {
        const bool opposite = slack_side ? e.rmax() > 0 : e.rmin() < 0;
        if (opposite && (!other || std::abs(e.lambda - at.lambda) < std::abs(other->lambda - at.lambda)))
          other = &e;
      }
      const Indemnity& Ia = slack_side ? at.I1 : at.I0;
      const double ra = slack_side ? at.r1 : at.r0;
      contract = Ia;
      eta = slack_side ? 1.0 : 0.0;
      if (other) {
        const Indemnity& Ib = slack_side ? other->I1 : other->I0;
        const double rb = slack_side ? other->r1 : other->r0;
        const double w = std::clamp(rb / (rb - ra), 0.0, 1.0);
        contract = Indemnity::mix(Ia, Ib, w);
        diag.push_back("residual does not change sign at lambda*: contract mixes neighbours with weight " +
                       std::to_string(w));
      }
    }
  }
  sol.lambda_star = at.lambda;
  sol.beta_star = at.inner.beta_star;
  sol.b_star = at.inner.b_star;
  sol.eta_tilde = eta;
  sol.worst_survival = at.inner.curve;
  sol.partition = at.inner.partition;
  sol.psi = at.inner.psi;
  sol.indemnity = contract;
  sol.slack = constraint_residual(contract, scn, V);
  sol.kkt_residual = std::abs(sol.lambda_star * sol.slack);
  sol.premium = expected_value_premium(contract, scn.SQ, scn.theta);
  sol.zero_set_length = zero_set_length(at.I0, at.I1);
  {
    const auto& bp = contract.breakpoints();
    const auto& sl = contract.slopes();
    const SurvivalCurve& S = sol.worst_survival;
    std::vector<double> br = S.grid();
    double retained = 0.0;
    for (std::size_t i = 0; i < sl.size(); ++i) {
      if (sl[i] >= 1.0) continue;
      retained += (1.0 - sl[i]) * num::integrate([&](double x) { return scn.g.g(S(x)); }, bp[i],
                                                 bp[i + 1], br, {1e-10, 1e-12, 20000});
    }
    sol.objective = sol.premium + retained;
  }
  sol.dual_value = at.inner.value - sol.lambda_star * (scn.A - V);
  sol.diagnostics = at.inner.diagnostics;
  sol.diagnostics.insert(sol.diagnostics.end(), diag.begin(), diag.end());
  return sol;
}

}  // namespace bwrisk

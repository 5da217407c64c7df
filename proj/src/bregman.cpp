#include "bwrisk/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "bwrisk/numerics.hpp"

namespace bwrisk {

double BregmanGenerator::dphi_inverse(double u) const {
  if (u <= dphi(0.0)) return 0.0;
  if (u >= dphi(domain_max)) return domain_max;
  if (dphi_inv_exact) return std::clamp(dphi_inv_exact(u), 0.0, domain_max);
  return num::bisect_first_true([&](double x) { return dphi(x) >= u; }, 0.0, domain_max,
                                1e-14 * std::max(1.0, domain_max));
}

BregmanGenerator make_quadratic_generator(double domain_max) {
  if (!(domain_max > 0)) throw DomainError("quadratic generator: domain_max must be positive");
  BregmanGenerator g;
  g.name = "quadratic";
  g.phi = [](double x) { return x * x; };
  g.dphi = [](double x) { return 2.0 * x; };
  g.d2phi = [](double) { return 2.0; };
  g.dphi_inv_exact = [](double u) { return 0.5 * u; };
  g.domain_max = domain_max;
  return g;
}

BregmanGenerator make_piecewise_quadratic_generator(double q, double k, double domain_max) {
  if (!(q > 0 && q < domain_max) || !(k > 0) || !std::isfinite(k))
    throw DomainError("piecewise_quadratic generator: need 0 < q < M and k > 0");
  BregmanGenerator g;
  std::ostringstream os;
  os << "piecewise_quadratic(" << q << "," << k << ")";
  g.name = os.str();
  g.phi = [q, k](double x) {
    if (x < q) return x * x;
    const double d = x - q;
    return q * q + 2.0 * q * d + k * d * d;
  };
  g.dphi = [q, k](double x) { return x < q ? 2.0 * x : 2.0 * q + 2.0 * k * (x - q); };
  g.d2phi = [q, k](double x) { return x < q ? 2.0 : 2.0 * k; };
  g.dphi_inv_exact = [q, k](double u) { return u < 2.0 * q ? 0.5 * u : q + (u - 2.0 * q) / (2.0 * k); };
  g.domain_max = domain_max;
  if (k != 1.0) g.kinks = {q};
  return g;
}

BregmanGenerator make_xlogx_shift_generator(double a, double domain_max) {
  if (!(a > 0) || !(domain_max > 0))
    throw DomainError("xlogx_shift generator: need a > 0 and M > 0");
  BregmanGenerator g;
  std::ostringstream os;
  os << "xlogx_shift(" << a << ")";
  g.name = os.str();
  g.phi = [a](double x) { return (x + a) * std::log(x + a); };
  g.dphi = [a](double x) { return std::log(x + a) + 1.0; };
  g.d2phi = [a](double x) { return 1.0 / (x + a); };
  g.dphi_inv_exact = [a](double u) { return std::exp(u - 1.0) - a; };
  g.domain_max = domain_max;
  return g;
}

void check_generator(const BregmanGenerator& gen, int grid) {
  const double M = gen.domain_max;
  if (!(M > 0)) throw DomainError(gen.name + ": domain_max must be positive");
  double sup_d = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double x = M * i / grid;
    const double d2 = gen.d2phi(x);
    if (!(d2 > 0) || !std::isfinite(d2))
      throw DomainError(gen.name + ": second derivative not positive at x=" + std::to_string(x));
    sup_d = std::max(sup_d, std::abs(gen.dphi(x)));
    if (i == 0 || i == grid) continue;
    const double h = 1e-4 * std::max(1.0, M / grid);
    bool near_kink = false;
    for (double k : gen.kinks) near_kink |= std::abs(x - k) < 2 * h;
    if (near_kink) continue;
    const double fd1 = (gen.phi(x + h) - gen.phi(x - h)) / (2 * h);
    const double fd2 = (gen.dphi(x + h) - gen.dphi(x - h)) / (2 * h);
    if (std::abs(fd1 - gen.dphi(x)) > 1e-6 * std::max(1.0, std::abs(gen.dphi(x))))
      throw DomainError(gen.name + ": dphi inconsistent with phi at x=" + std::to_string(x));
    if (std::abs(fd2 - d2) > 1e-6 * std::max(1.0, std::abs(d2)))
      throw DomainError(gen.name + ": d2phi inconsistent with dphi at x=" + std::to_string(x));
  }
  if (!std::isfinite(sup_d)) throw DomainError(gen.name + ": unbounded first derivative");
}

double pointwise_divergence(const BregmanGenerator& gen, double x, double y) {
  const double M = gen.domain_max, slack = 1e-12 * std::max(1.0, M);
  if (!(x >= -slack && x <= M + slack && y >= -slack && y <= M + slack))
    throw DomainError("pointwise_divergence: arguments outside [0, M]");
  x = std::clamp(x, 0.0, M);
  y = std::clamp(y, 0.0, M);
  if (x == y) return 0.0;
  return std::max(0.0, bregman(gen, x, y));
}

namespace {

void check_support(const BregmanGenerator& gen, const LossDistribution& F1,
                   const LossDistribution& F2) {
  const double slack = 1e-12 * std::max(1.0, gen.domain_max);
  if (F1.support_max() > gen.domain_max + slack || F2.support_max() > gen.domain_max + slack)
    throw DomainError("BW divergence: distribution support exceeds generator domain");
}

std::vector<double> t_breaks(const BregmanGenerator& gen, const LossDistribution& F1,
                             const LossDistribution& F2) {
  std::vector<double> br = F1.p_breaks();
  auto p2 = F2.p_breaks();
  br.insert(br.end(), p2.begin(), p2.end());
  for (double k : gen.kinks) {
    br.push_back(F1.cdf(k));
    br.push_back(F2.cdf(k));
  }
  return br;
}

}  // namespace

double bw_quantile(const BregmanGenerator& gen, const LossDistribution& F1,
                   const LossDistribution& F2, double tol) {
  check_support(gen, F1, F2);
  auto f = [&](double t) {
    const double x = F1.quantile(t), y = F2.quantile(t);
    return x == y ? 0.0 : bregman(gen, x, y);
  };
  return num::integrate(f, 0.0, 1.0, t_breaks(gen, F1, F2), {tol, 1e-13, 20000});
}

double bw_survival(const BregmanGenerator& gen, const LossDistribution& F1,
                   const LossDistribution& F2, double tol) {
  check_support(gen, F1, F2);
  const double M = gen.domain_max;
  const double d0 = gen.dphi(0.0);
  std::vector<double> xb1 = F1.x_breaks(), xb2 = F2.x_breaks();
  xb1.insert(xb1.end(), gen.kinks.begin(), gen.kinks.end());
  xb2.insert(xb2.end(), gen.kinks.begin(), gen.kinks.end());
  const num::QuadOptions outer{tol / 4, 1e-13, 20000};
  const num::QuadOptions inner{tol / 40, 1e-14, 20000};

  const double t1 = num::integrate(
      [&](double x) { return (gen.dphi(x) - d0) * F1.sf(x); }, 0.0, M, xb1, outer);
  const double t2 = num::integrate(
      [&](double x) { return gen.d2phi(x) * x * F2.sf(x); }, 0.0, M, xb2, outer);

  // Inner integral over y of phi''(y) * min(S2(y), s); split where S2 crosses s.
  auto inner_int = [&](double s) {
    if (s <= 0.0) return 0.0;
    std::vector<double> br = xb2;
    if (s < 1.0) {
      br.push_back(F2.quantile(1.0 - s));
      br.push_back(F2.upper_quantile(1.0 - s));
    }
    return num::integrate(
        [&](double y) { return gen.d2phi(y) * std::min(F2.sf(y), s); }, 0.0, M, br, inner);
  };
  // inner_int bends wherever S1(x) crosses a probability level of F2.
  std::vector<double> xb3 = xb1;
  for (double p : F2.p_breaks())
    if (p > 0.0 && p < 1.0) {
      xb3.push_back(F1.quantile(p));
      xb3.push_back(F1.upper_quantile(p));
    }
  for (double k : gen.kinks) {
    const double p = F2.cdf(k);
    if (p > 0.0 && p < 1.0) xb3.push_back(F1.quantile(p));
  }
  const double t3 = num::integrate([&](double x) { return inner_int(F1.sf(x)); }, 0.0, M,
                                   xb3, outer);
  return t1 + t2 - t3;
}

}  // namespace bwrisk

#include "bwrisk/budget.hpp"

#include <algorithm>
#include <cmath>

#include "bwrisk/numerics.hpp"

namespace bwrisk {

BudgetKernel::BudgetKernel(BregmanGenerator gen, LossDistribution F0, int table_size)
    : gen_(std::move(gen)), F0_(std::move(F0)), dphi0_(gen_.dphi(0.0)) {
  const double M = gen_.domain_max;
  std::vector<double> nodes;
  for (int i = 0; i <= table_size; ++i) nodes.push_back(M * i / table_size);
  for (int i = 1; i < table_size; ++i) nodes.push_back(F0_.quantile(double(i) / table_size));
  for (double x : F0_.x_breaks()) nodes.push_back(x);
  for (double x : gen_.kinks) nodes.push_back(x);
  nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                             [M](double x) { return !(x >= 0 && x <= M); }),
              nodes.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [M](double a, double b) { return b - a <= 1e-13 * std::max(1.0, M); }),
              nodes.end());
  nodes.back() = M;
  z_ = nodes;
  const std::size_t n = z_.size();
  T_.assign(n, 0.0);
  dl_.assign(n, 0.0);
  dr_.assign(n, 0.0);
  auto integrand = [&](double y) { return gen_.d2phi(y) * F0_.sf(y); };
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = z_[i], b = z_[i + 1];
    T_[i] = T_[i + 1] + num::integrate(integrand, a, b, {}, {1e-15, 1e-14, 200});
    const double h = b - a, e = 1e-9 * h;
    dr_[i] = -integrand(a + e);
    dl_[i + 1] = -integrand(b - e);
  }
  bench_term_ = num::integrate([&](double y) { return gen_.d2phi(y) * y * F0_.sf(y); },
                               0.0, M, F0_.x_breaks(),
                               {1e-13, 1e-14, 20000});
}

double BudgetKernel::tail(double z) const {
  if (z <= 0.0) return T_.front();
  if (z >= M()) return 0.0;
  std::size_t j = std::upper_bound(z_.begin(), z_.end(), z) - z_.begin();
  const std::size_t i = j - 1;
  const double h = z_[j] - z_[i];
  const double s = (z - z_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * T_[i] + h10 * h * dr_[i] + h01 * T_[j] + h11 * h * dl_[j];
}

double BudgetKernel::C(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return T_.front();
  // y* = inf{y : S0(y) <= t}
  const double ys = F0_.quantile(1.0 - t);
  return t * (gen_.dphi(ys) - dphi0_) + tail(ys);
}

}  // namespace bwrisk

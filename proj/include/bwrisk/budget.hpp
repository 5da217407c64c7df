#pragma once

#include <vector>

#include "bwrisk/bregman.hpp"
#include "bwrisk/dist.hpp"

namespace bwrisk {

// Survival-form pieces of the BW divergence against a fixed benchmark F0:
//   C(t) = int_0^M phi''(y) min(S0(y), t) dy
//   j(t, x) = [phi'(x) - phi'(0)] t - C(t)
// so that BW(S, F0) = int j(S(x), x) dx + int phi''(y) y S0(y) dy.
class BudgetKernel {
 public:
  BudgetKernel(BregmanGenerator gen, LossDistribution F0, int table_size = 4000);

  double C(double t) const;
  double j(double t, double x) const { return (gen_.dphi(x) - dphi0_) * t - C(t); }
  // int_a^b [phi'(x) - phi'(0)] dx
  double int_dphi(double a, double b) const {
    return gen_.phi(b) - gen_.phi(a) - dphi0_ * (b - a);
  }
  // int_z^M phi''(y) S0(y) dy
  double tail(double z) const;
  // int_0^M phi''(y) y S0(y) dy
  double bench_term() const { return bench_term_; }
  double zeta(double epsilon) const { return epsilon - bench_term_; }

  const BregmanGenerator& gen() const { return gen_; }
  const LossDistribution& benchmark() const { return F0_; }
  double M() const { return gen_.domain_max; }

 private:
  BregmanGenerator gen_;
  LossDistribution F0_;
  double dphi0_;
  double bench_term_;
  std::vector<double> z_, T_, dl_, dr_;  // nodes, values, one-sided slopes
};

}  // namespace bwrisk

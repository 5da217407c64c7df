#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bwrisk/dist.hpp"

namespace bwrisk {

// Strictly convex generator phi on [0, domain_max].
struct BregmanGenerator {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;  // right limit at kinks
  std::function<double(double)> dphi_inv_exact;  // optional closed form
  double domain_max = 0.0;
  std::vector<double> kinks;  // points where d2phi jumps

  // [phi']^{-1}(u) clamped to [0, domain_max]; bisection if no closed form.
  double dphi_inverse(double u) const;
};

BregmanGenerator make_quadratic_generator(double domain_max);
BregmanGenerator make_piecewise_quadratic_generator(double q_alpha, double k, double domain_max);
BregmanGenerator make_xlogx_shift_generator(double a, double domain_max);

// Grid checks of strict convexity, bounded derivative and derivative
// consistency. Throws DomainError naming the first failure.
void check_generator(const BregmanGenerator& gen, int grid = 400);

// B(x, y) without domain checks.
inline double bregman(const BregmanGenerator& gen, double x, double y) {
  return gen.phi(x) - gen.phi(y) - gen.dphi(y) * (x - y);
}

double pointwise_divergence(const BregmanGenerator& gen, double x, double y);

// Integral over (0,1) of B(F1^{-1}(t), F2^{-1}(t)).
double bw_quantile(const BregmanGenerator& gen, const LossDistribution& F1,
                   const LossDistribution& F2, double tol = 1e-10);

// Three-term survival-function representation of the same divergence.
double bw_survival(const BregmanGenerator& gen, const LossDistribution& F1,
                   const LossDistribution& F2, double tol = 1e-10);

}  // namespace bwrisk

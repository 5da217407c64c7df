#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "bwrisk/dist.hpp"

namespace bwrisk {

// Piecewise-linear indemnity I with I(0) = 0. breakpoints[0] = 0 and
// breakpoints.back() = M; slopes[i] applies on [breakpoints[i], breakpoints[i+1]).
class Indemnity {
 public:
  Indemnity() = default;
  Indemnity(std::vector<double> breakpoints, std::vector<double> slopes);

  static Indemnity zero(double M);
  // (min(x, upper) - lower)_+
  static Indemnity layer(double lower, double upper, double M);
  // Marginal indemnity given by a list of (start, end, slope) pieces; gaps get slope 0.
  static Indemnity from_pieces(const std::vector<std::array<double, 3>>& pieces, double M);

  double operator()(double x) const;
  double slope_at(double x) const;  // right derivative
  double support_max() const { return bp_.empty() ? 0.0 : bp_.back(); }
  const std::vector<double>& breakpoints() const { return bp_; }
  const std::vector<double>& slopes() const { return sl_; }

  // Pointwise convex combination w*I + (1-w)*J.
  static Indemnity mix(const Indemnity& I, const Indemnity& J, double w);

  // Throws DomainError unless breakpoints are ordered from 0 and slopes lie in [0,1].
  void validate() const;
  std::string describe() const;

 private:
  void normalize();
  std::vector<double> bp_;
  std::vector<double> sl_;
};

// (1 + theta) * int I'(x) S_Q(x) dx
double expected_value_premium(const Indemnity& I, const LossDistribution& SQ, double theta);

// Marginal rule: slope 1 where H < -zero_tol, eta where |H| <= zero_tol, 0 where
// H > zero_tol. H is sampled on `grid` points plus `extra` abscissae and sign
// changes are refined by bisection.
Indemnity indemnity_from_sign(const std::function<double(double)>& H, double M, double eta,
                              int grid, const std::vector<double>& extra,
                              double zero_tol = 1e-10);

}  // namespace bwrisk

#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "bwrisk/dist.hpp"

namespace bwrisk {

// Right-continuous, piecewise-linear survival curve on [0, M]. A repeated
// abscissa encodes a jump; the later value holds at that point. An optional
// exact evaluator, when attached, answers point queries while the knots
// remain its tabulation.
class SurvivalCurve {
 public:
  SurvivalCurve() = default;
  SurvivalCurve(std::vector<double> grid, std::vector<double> values);

  static SurvivalCurve from_distribution(const LossDistribution& d, int n = 2000);

  double operator()(double x) const;
  double left(double x) const;  // left limit
  double tabulated(double x) const;

  void attach_exact(std::function<double(double)> f) {
    exact_ = std::make_shared<std::function<double(double)>>(std::move(f));
  }
  bool has_exact() const { return static_cast<bool>(exact_); }

  double support_max() const { return x_.empty() ? 0.0 : x_.back(); }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return v_; }

  bool is_nonincreasing(double tol = 1e-12) const;
  // Pointwise S >= S0 at knots, left limits and cell midpoints.
  bool dominates(const LossDistribution& F0, double tol = 1e-10) const;
  // Loss distribution with CDF 1 - S; a positive value at M becomes an atom at M.
  LossDistribution to_distribution() const;

 private:
  std::vector<double> x_, v_;
  std::shared_ptr<const std::function<double(double)>> exact_;
};

}  // namespace bwrisk

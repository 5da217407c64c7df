#include "bwrisk/survival_curve.hpp"

#include <algorithm>
#include <cmath>

#include "bwrisk/errors.hpp"

namespace bwrisk {

SurvivalCurve::SurvivalCurve(std::vector<double> grid, std::vector<double> values)
    : x_(std::move(grid)), v_(std::move(values)) {
  if (x_.size() < 2 || x_.size() != v_.size())
    throw DomainError("survival curve: need at least two knots and matching values");
  if (x_.front() != 0.0) throw DomainError("survival curve: grid must start at 0");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (x_[i] < x_[i - 1]) throw DomainError("survival curve: grid not ordered");
  for (double& v : v_) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw DomainError("survival curve: value outside [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
}

SurvivalCurve SurvivalCurve::from_distribution(const LossDistribution& d, int n) {
  const double M = d.support_max();
  std::vector<double> xs;
  for (int i = 0; i <= n; ++i) xs.push_back(M * i / n);
  for (double b : d.x_breaks())
    if (b >= 0 && b <= M) xs.push_back(b);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> gx, gv;
  for (double x : xs) {
    const double l = d.survival_left(x), r = d.survival(x);
    if (x > 0 && l != r) {
      gx.push_back(x);
      gv.push_back(l);
    }
    gx.push_back(x);
    gv.push_back(r);
  }
  SurvivalCurve c(gx, gv);
  c.attach_exact([d](double x) { return d.sf(x); });
  return c;
}

double SurvivalCurve::tabulated(double x) const {
  if (x <= x_.front()) return x < x_.front() ? 1.0 : v_.front();
  if (x >= x_.back()) return v_.back();
  const std::size_t j = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
  const std::size_t i = j - 1;
  if (x_[j] == x_[i]) return v_[j];
  return v_[i] + (v_[j] - v_[i]) * (x - x_[i]) / (x_[j] - x_[i]);
}

double SurvivalCurve::operator()(double x) const {
  if (exact_) return (*exact_)(x);
  return tabulated(x);
}

double SurvivalCurve::left(double x) const {
  if (x <= x_.front()) return 1.0;
  if (x > x_.back()) return v_.back();
  const std::size_t j = std::lower_bound(x_.begin(), x_.end(), x) - x_.begin();
  if (x_[j] == x) return v_[j];
  const std::size_t i = j - 1;
  return v_[i] + (v_[j] - v_[i]) * (x - x_[i]) / (x_[j] - x_[i]);
}

bool SurvivalCurve::is_nonincreasing(double tol) const {
  for (std::size_t i = 1; i < v_.size(); ++i)
    if (v_[i] > v_[i - 1] + tol) return false;
  return true;
}

bool SurvivalCurve::dominates(const LossDistribution& F0, double tol) const {
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double x = x_[i];
    if (v_[i] < F0.sf(x) - tol) {
      // A duplicated knot stores the left limit first.
      const bool left_knot = i + 1 < x_.size() && x_[i + 1] == x;
      const double sl = x <= F0.support_max() ? F0.survival_left(x) : 0.0;
      if (!left_knot || v_[i] < sl - tol) return false;
    }
    if (i + 1 < x_.size() && x_[i + 1] > x) {
      const double m = 0.5 * (x + x_[i + 1]);
      if (tabulated(m) < F0.sf(m) - tol) return false;
    }
  }
  return true;
}

LossDistribution SurvivalCurve::to_distribution() const {
  std::vector<std::pair<double, double>> k;
  double prev = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double F = std::max(prev, 1.0 - v_[i]);
    if (!k.empty() && k.back().first == x_[i] && i >= 2 && x_[i - 2] == x_[i]) {
      k.back().second = F;
    } else {
      k.emplace_back(x_[i], F);
    }
    prev = F;
  }
  if (k.back().second < 1.0) {
    if (k.size() >= 2 && k[k.size() - 2].first == k.back().first)
      k.back().second = 1.0;
    else
      k.emplace_back(x_.back(), 1.0);
  }
  return LossDistribution::tabulated(std::move(k));
}

}  // namespace bwrisk

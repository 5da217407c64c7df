#include "bwrisk/indemnity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "bwrisk/numerics.hpp"

namespace bwrisk {

Indemnity::Indemnity(std::vector<double> breakpoints, std::vector<double> slopes)
    : bp_(std::move(breakpoints)), sl_(std::move(slopes)) {
  validate();
  normalize();
}

void Indemnity::validate() const {
  if (bp_.size() < 2 || sl_.size() + 1 != bp_.size())
    throw DomainError("indemnity: need n+1 breakpoints for n slopes");
  if (bp_.front() != 0.0) throw DomainError("indemnity: first breakpoint must be 0");
  for (std::size_t i = 0; i + 1 < bp_.size(); ++i)
    if (!(bp_[i + 1] >= bp_[i])) throw DomainError("indemnity: breakpoints not ordered");
  for (double s : sl_)
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("indemnity: slope outside [0,1]");
}

void Indemnity::normalize() {
  std::vector<double> bp{bp_.front()}, sl;
  for (std::size_t i = 0; i < sl_.size(); ++i) {
    if (!(bp_[i + 1] > bp_[i])) continue;
    if (!sl.empty() && sl.back() == sl_[i]) {
      bp.back() = bp_[i + 1];
    } else {
      sl.push_back(sl_[i]);
      bp.push_back(bp_[i + 1]);
    }
  }
  if (sl.empty()) {
    sl.push_back(0.0);
    bp.push_back(bp_.back());
  }
  bp_ = std::move(bp);
  sl_ = std::move(sl);
}

Indemnity Indemnity::zero(double M) { return Indemnity({0.0, M}, {0.0}); }

Indemnity Indemnity::layer(double lower, double upper, double M) {
  lower = std::clamp(lower, 0.0, M);
  upper = std::clamp(upper, 0.0, M);
  if (upper <= lower) return zero(M);
  return Indemnity({0.0, lower, upper, M}, {0.0, 1.0, 0.0});
}

Indemnity Indemnity::from_pieces(const std::vector<std::array<double, 3>>& pieces, double M) {
  std::vector<std::array<double, 3>> p = pieces;
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
  std::vector<double> bp{0.0}, sl;
  for (const auto& [a0, b0, s] : p) {
    const double a = std::clamp(a0, bp.back(), M), b = std::clamp(b0, 0.0, M);
    if (!(b > a)) continue;
    if (a > bp.back()) {
      sl.push_back(0.0);
      bp.push_back(a);
    }
    sl.push_back(s);
    bp.push_back(b);
  }
  if (bp.back() < M) {
    sl.push_back(0.0);
    bp.push_back(M);
  }
  return Indemnity(bp, sl);
}

double Indemnity::operator()(double x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < sl_.size(); ++i) {
    if (x <= bp_[i]) break;
    v += sl_[i] * (std::min(x, bp_[i + 1]) - bp_[i]);
  }
  return v;
}

double Indemnity::slope_at(double x) const {
  if (sl_.empty()) return 0.0;
  std::size_t j = std::upper_bound(bp_.begin(), bp_.end(), x) - bp_.begin();
  if (j == 0) return sl_.front();
  if (j > sl_.size()) return sl_.back();
  return sl_[j - 1];
}

Indemnity Indemnity::mix(const Indemnity& I, const Indemnity& J, double w) {
  std::vector<double> bp = I.bp_;
  bp.insert(bp.end(), J.bp_.begin(), J.bp_.end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<double> sl;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double m = 0.5 * (bp[i] + bp[i + 1]);
    sl.push_back(std::clamp(w * I.slope_at(m) + (1 - w) * J.slope_at(m), 0.0, 1.0));
  }
  return Indemnity(bp, sl);
}

std::string Indemnity::describe() const {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < sl_.size(); ++i) {
    if (sl_[i] == 0.0) continue;
    os << "[" << bp_[i] << ", " << bp_[i + 1] << ")@" << sl_[i] << " ";
  }
  std::string s = os.str();
  return s.empty() ? "zero" : s;
}

double expected_value_premium(const Indemnity& I, const LossDistribution& SQ, double theta) {
  double s = 0.0;
  const auto& bp = I.breakpoints();
  const auto& sl = I.slopes();
  for (std::size_t i = 0; i < sl.size(); ++i)
    if (sl[i] != 0.0) s += sl[i] * SQ.integrated_survival(bp[i], bp[i + 1]);
  return (1.0 + theta) * s;
}

Indemnity indemnity_from_sign(const std::function<double(double)>& H, double M, double eta,
                              int grid, const std::vector<double>& extra, double zero_tol) {
  auto cls = [&](double x) {
    const double h = H(x);
    return h < -zero_tol ? 0 : (h > zero_tol ? 2 : 1);
  };
  const double slope_of[3] = {1.0, eta, 0.0};
  std::vector<double> xs;
  for (int i = 0; i <= grid; ++i) xs.push_back(M * i / grid);
  for (double e : extra) {
    if (e > 0 && e < M) {
      xs.push_back(e);
      // Sample both sides of a known discontinuity.
      xs.push_back(std::max(0.0, e - 1e-9 * std::max(1.0, M)));
      xs.push_back(std::min(M, e + 1e-9 * std::max(1.0, M)));
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  // Classify cell midpoints so isolated zeros at grid points do not register.
  std::vector<std::array<double, 3>> pieces;
  double start = 0.0;
  int cur = cls(0.5 * (xs[0] + xs[1]));
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double m = 0.5 * (xs[i] + xs[i + 1]);
    const int c = cls(m);
    if (c == cur) continue;
    const double lo = 0.5 * (xs[i - 1] + xs[i]);
    const double cut = num::bisect_first_true([&](double x) { return cls(x) != cur; }, lo, m,
                                              1e-12 * std::max(1.0, M));
    pieces.push_back({start, cut, slope_of[cur]});
    start = cut;
    cur = c;
  }
  pieces.push_back({start, M, slope_of[cur]});
  return Indemnity::from_pieces(pieces, M);
}

}  // namespace bwrisk

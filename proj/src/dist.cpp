#include "bwrisk/dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bwrisk/errors.hpp"
#include "bwrisk/numerics.hpp"

namespace bwrisk {
namespace detail {

struct DistImpl {
  virtual ~DistImpl() = default;
  virtual LossDistribution::Kind kind() const = 0;
  virtual double support_max() const = 0;
  virtual double cdf(double x) const = 0;
  virtual double cdf_left(double x) const = 0;
  virtual double quantile(double t) const = 0;
  virtual double surv(double x) const { return 1.0 - cdf(x); }
  virtual double surv_left(double x) const { return 1.0 - cdf_left(x); }
  virtual double upper_quantile(double u) const {
    // Generic: last x with F(x) <= u, by bisection on the monotone CDF.
    const double M = support_max();
    if (cdf(0.0) > u + kProbTol) return 0.0;
    if (u >= 1.0) return M;
    return num::bisect_first_true([&](double x) { return cdf(x) > u + kProbTol; },
                                  0.0, M, 1e-13 * std::max(1.0, M));
  }
  virtual double integrated_survival(double a, double b) const {
    auto br = x_breaks();
    return num::integrate([&](double x) { return 1.0 - cdf(x); }, a, b, br,
                          {1e-13, 1e-13, 20000});
  }
  virtual std::vector<double> x_breaks() const = 0;
  virtual std::vector<double> p_breaks() const = 0;
  virtual std::string describe() const = 0;
};

namespace {

struct TruncExp final : DistImpl {
  double m, M, c, tail;
  TruncExp(double mean, double smax)
      : m(mean), M(smax), c(-std::expm1(-smax / mean)), tail(std::exp(-smax / mean)) {}
  LossDistribution::Kind kind() const override {
    return LossDistribution::Kind::TruncatedExponential;
  }
  double support_max() const override { return M; }
  double cdf(double x) const override {
    if (x < 0) return 0.0;
    if (x >= M) return 1.0;
    return -std::expm1(-x / m) / c;
  }
  double cdf_left(double x) const override { return x > M ? 1.0 : cdf(x); }
  // Direct form keeps relative accuracy far in the tail.
  double surv(double x) const override {
    if (x < 0) return 1.0;
    if (x >= M) return 0.0;
    return std::max(0.0, (std::exp(-x / m) - tail) / c);
  }
  double surv_left(double x) const override { return x > M ? 0.0 : surv(x); }
  double quantile(double t) const override {
    if (t >= 1.0) return M;
    return std::min(M, -m * std::log1p(-t * c));
  }
  double upper_quantile(double u) const override {
    if (u <= 0) return 0.0;
    if (u >= 1.0) return M;
    return quantile(u);
  }
  double integrated_survival(double a, double b) const override {
    a = std::clamp(a, 0.0, M);
    b = std::clamp(b, 0.0, M);
    if (b <= a) return 0.0;
    return (m * (std::exp(-a / m) - std::exp(-b / m)) - (b - a) * tail) / c;
  }
  std::vector<double> x_breaks() const override { return {}; }
  std::vector<double> p_breaks() const override { return {}; }
  std::string describe() const override {
    std::ostringstream os;
    os << "truncated_exponential(mean=" << m << ", M=" << M << ")";
    return os.str();
  }
};

struct Tabulated final : DistImpl {
  std::vector<std::pair<double, double>> k;
  std::vector<double> xs, ps;
  explicit Tabulated(std::vector<std::pair<double, double>> knots) : k(std::move(knots)) {
    for (auto& [x, p] : k) {
      xs.push_back(x);
      ps.push_back(p);
    }
  }
  LossDistribution::Kind kind() const override { return LossDistribution::Kind::Tabulated; }
  double support_max() const override { return xs.back(); }
  double interp(std::size_t i, std::size_t j, double x) const {
    if (xs[j] == xs[i]) return ps[j];
    return ps[i] + (ps[j] - ps[i]) * (x - xs[i]) / (xs[j] - xs[i]);
  }
  double cdf(double x) const override {
    if (x < xs.front()) return 0.0;
    if (x >= xs.back()) return 1.0;
    const std::size_t j = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
    return interp(j - 1, j, x);
  }
  double cdf_left(double x) const override {
    if (x <= xs.front()) return 0.0;
    if (x > xs.back()) return 1.0;
    const std::size_t j = std::lower_bound(xs.begin(), xs.end(), x) - xs.begin();
    if (xs[j] == x) return ps[j];
    return interp(j - 1, j, x);
  }
  double quantile(double t) const override {
    std::size_t i = 0;
    while (i < ps.size() && ps[i] < t - kProbTol) ++i;
    if (i >= ps.size()) return xs.back();
    if (i == 0) return xs[0];
    if (xs[i] == xs[i - 1] || ps[i] == ps[i - 1]) return xs[i];
    const double x = xs[i - 1] + (t - ps[i - 1]) / (ps[i] - ps[i - 1]) * (xs[i] - xs[i - 1]);
    return std::clamp(x, xs[i - 1], xs[i]);
  }
  double upper_quantile(double u) const override {
    std::size_t j = 0;
    while (j < ps.size() && ps[j] <= u + kProbTol) ++j;
    if (j >= ps.size()) return xs.back();
    if (j == 0) return xs[0];
    if (xs[j] == xs[j - 1]) return xs[j];
    const double x = xs[j - 1] + (u - ps[j - 1]) / (ps[j] - ps[j - 1]) * (xs[j] - xs[j - 1]);
    return std::clamp(x, xs[j - 1], xs[j]);
  }
  double integrated_survival(double a, double b) const override {
    a = std::max(a, 0.0);
    b = std::min(b, xs.back());
    if (b <= a) return 0.0;
    std::vector<double> cuts = num::interior_points(xs, a, b);
    cuts.insert(cuts.begin(), a);
    cuts.push_back(b);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double p = cuts[i], q = cuts[i + 1];
      s += 0.5 * (q - p) * ((1.0 - cdf(p)) + (1.0 - cdf_left(q)));
    }
    return s;
  }
  std::vector<double> x_breaks() const override { return xs; }
  std::vector<double> p_breaks() const override { return ps; }
  std::string describe() const override {
    return "tabulated(" + std::to_string(k.size()) + " knots)";
  }
};

struct Flattened final : DistImpl {
  LossDistribution base;
  double a, b, level;
  Flattened(LossDistribution base_, double a_, double b_, double level_)
      : base(std::move(base_)), a(a_), b(b_), level(level_) {}
  LossDistribution::Kind kind() const override { return LossDistribution::Kind::Flattened; }
  double support_max() const override { return base.support_max(); }
  double cdf(double x) const override {
    if (x < level) return std::min(base.cdf(x), a);
    return std::max(b, base.cdf(x));
  }
  double cdf_left(double x) const override {
    if (x <= level) return std::min(base.cdf_left(x), a);
    return std::max(b, base.cdf_left(x));
  }
  double quantile(double t) const override {
    if (t > a && t <= b) return level;
    return base.quantile(t);
  }
  std::vector<double> x_breaks() const override {
    auto v = base.x_breaks();
    v.push_back(level);
    return v;
  }
  std::vector<double> p_breaks() const override {
    auto v = base.p_breaks();
    v.push_back(a);
    v.push_back(b);
    return v;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "flattened(" << base.describe() << ", (" << a << ", " << b << "] -> " << level << ")";
    return os.str();
  }
};

}  // namespace
}  // namespace detail

LossDistribution LossDistribution::truncated_exponential(double mean, double support_max) {
  if (!(mean > 0) || !(support_max > 0) || !std::isfinite(mean) || !std::isfinite(support_max))
    throw DomainError("truncated_exponential: mean and support_max must be positive");
  if (!(support_max > mean))
    throw DomainError("truncated_exponential: support_max must exceed mean");
  return LossDistribution(std::make_shared<detail::TruncExp>(mean, support_max));
}

LossDistribution LossDistribution::tabulated(std::vector<std::pair<double, double>> knots) {
  std::vector<std::string> errs;
  if (knots.empty()) throw ValidationError({"knots: empty list"});
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [x, p] = knots[i];
    if (!std::isfinite(x) || !std::isfinite(p)) errs.push_back("knot " + std::to_string(i) + ": non-finite value");
    if (x < 0) errs.push_back("knot " + std::to_string(i) + ": negative loss");
    if (p < 0 || p > 1.0 + kProbTol) errs.push_back("knot " + std::to_string(i) + ": probability outside [0,1]");
    if (i > 0) {
      if (x < knots[i - 1].first) errs.push_back("knot " + std::to_string(i) + ": losses not sorted");
      if (p < knots[i - 1].second - kProbTol)
        errs.push_back("knot " + std::to_string(i) + ": probabilities decreasing");
      if (i > 1 && x == knots[i - 1].first && x == knots[i - 2].first)
        errs.push_back("knot " + std::to_string(i) + ": loss repeated more than twice");
    }
  }
  if (std::abs(knots.back().second - 1.0) > kProbTol) errs.push_back("final probability must equal 1");
  if (!(knots.back().first > 0)) errs.push_back("support_max must be positive");
  if (!errs.empty()) throw ValidationError(errs);
  for (std::size_t i = 1; i < knots.size(); ++i)
    knots[i].second = std::clamp(std::max(knots[i].second, knots[i - 1].second), 0.0, 1.0);
  knots.back().second = 1.0;
  return LossDistribution(std::make_shared<detail::Tabulated>(std::move(knots)));
}

LossDistribution LossDistribution::uniform(double upper) {
  if (!(upper > 0)) throw DomainError("uniform: upper bound must be positive");
  return tabulated({{0.0, 0.0}, {upper, 1.0}});
}

LossDistribution LossDistribution::flattened(const LossDistribution& base, double a, double b,
                                             double level) {
  if (!(a >= 0 && a <= b && b <= 1.0)) throw DomainError("flattened: need 0 <= a <= b <= 1");
  const double M = base.support_max();
  if (!(level >= 0 && level <= M)) throw DomainError("flattened: level outside support");
  const double tol = 1e-9 * std::max(1.0, M);
  if (a > 0 && base.quantile(a) > level + tol)
    throw DomainError("flattened: level below the quantile at the window start");
  if (b < 1.0 && base.quantile(std::min(1.0, b + kProbTol)) < level - tol &&
      base.cdf(level) > b + kProbTol)
    throw DomainError("flattened: level above the quantile past the window end");
  return LossDistribution(std::make_shared<detail::Flattened>(base, a, b, level));
}

LossDistribution::LossDistribution()
    : impl_(std::make_shared<detail::Tabulated>(
          std::vector<std::pair<double, double>>{{0.0, 0.0}, {1.0, 1.0}})) {}

LossDistribution::Kind LossDistribution::kind() const { return impl_->kind(); }
double LossDistribution::support_max() const { return impl_->support_max(); }
double LossDistribution::cdf(double x) const { return impl_->cdf(x); }
double LossDistribution::cdf_left(double x) const { return impl_->cdf_left(x); }

namespace {
double check_x(double x, double M) {
  const double slack = 1e-12 * std::max(1.0, M);
  if (!(x >= -slack && x <= M + slack))
    throw DomainError("survival: loss " + std::to_string(x) + " outside [0, " + std::to_string(M) + "]");
  return std::clamp(x, 0.0, M);
}
}  // namespace

double LossDistribution::sf(double x) const {
  if (x < 0) return 1.0;
  if (x >= support_max()) return 0.0;
  return impl_->surv(x);
}

double LossDistribution::survival(double x) const {
  return impl_->surv(check_x(x, support_max()));
}
double LossDistribution::survival_left(double x) const {
  return impl_->surv_left(check_x(x, support_max()));
}
double LossDistribution::quantile(double t) const {
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("quantile: level " + std::to_string(t) + " outside (0,1]");
  return impl_->quantile(t);
}
double LossDistribution::upper_quantile(double u) const { return impl_->upper_quantile(u); }
double LossDistribution::integrated_survival(double a, double b) const {
  return impl_->integrated_survival(a, b);
}
std::vector<double> LossDistribution::x_breaks() const { return impl_->x_breaks(); }
std::vector<double> LossDistribution::p_breaks() const { return impl_->p_breaks(); }
std::string LossDistribution::describe() const { return impl_->describe(); }

const std::vector<std::pair<double, double>>& LossDistribution::knots() const {
  static const std::vector<std::pair<double, double>> empty;
  if (auto* t = dynamic_cast<const detail::Tabulated*>(impl_.get())) return t->k;
  return empty;
}

LossDistribution load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({"cannot open tabulated distribution file '" + path + "'"});
  std::vector<std::pair<double, double>> knots;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::replace(line.begin(), line.end(), '\t', ' ');
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    std::istringstream ls(line);
    double x, p;
    if (!(ls >> x >> p)) {
      if (lineno == 1) continue;
      throw ValidationError({path + ":" + std::to_string(lineno) + ": expected two numbers"});
    }
    if (!knots.empty() && !(x > knots.back().first))
      throw ValidationError({path + ":" + std::to_string(lineno) + ": losses must be strictly increasing"});
    knots.emplace_back(x, p);
  }
  return LossDistribution::tabulated(std::move(knots));
}

}  // namespace bwrisk

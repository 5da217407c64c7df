#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace bwrisk {

namespace detail {
struct DistImpl;
}

// Probability comparisons on flat segments and atom boundaries.
inline constexpr double kProbTol = 1e-12;

// A loss distribution on [0, support_max]. Immutable and cheap to copy.
class LossDistribution {
 public:
  enum class Kind { TruncatedExponential, Tabulated, Flattened };

  // Uniform on [0, 1].
  LossDistribution();

  static LossDistribution truncated_exponential(double mean, double support_max);
  // Piecewise-linear CDF through (x, F) knots; a repeated x encodes an atom.
  static LossDistribution tabulated(std::vector<std::pair<double, double>> knots);
  static LossDistribution uniform(double upper);
  // Quantile equal to `level` on (a, b] and to base's quantile elsewhere.
  static LossDistribution flattened(const LossDistribution& base, double a,
                                    double b, double level);

  Kind kind() const;
  double support_max() const;

  // Total functions of x: 0 below zero, 1 at and beyond support_max.
  double cdf(double x) const;
  double cdf_left(double x) const;

  // 1 - F(x) as a total function, computed without cancellation where possible.
  double sf(double x) const;

  // Checked versions; x must lie in [0, support_max].
  double survival(double x) const;
  double survival_left(double x) const;

  // inf{x : F(x) >= t}, t in (0, 1].
  double quantile(double t) const;
  // sup{x in [0, M] : F(x) <= u}.
  double upper_quantile(double u) const;

  // Integral of the survival function over [a, b] within the support.
  double integrated_survival(double a, double b) const;
  double mean() const { return integrated_survival(0.0, support_max()); }

  // Abscissae where F has kinks or jumps, and probability levels where the
  // quantile does. Used to split quadrature panels.
  std::vector<double> x_breaks() const;
  std::vector<double> p_breaks() const;

  // Knots of a tabulated distribution (empty for other kinds).
  const std::vector<std::pair<double, double>>& knots() const;

  std::string describe() const;

 private:
  explicit LossDistribution(std::shared_ptr<const detail::DistImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::DistImpl> impl_;
};

inline double quantile(const LossDistribution& d, double t) { return d.quantile(t); }
inline double survival(const LossDistribution& d, double x) { return d.survival(x); }

inline LossDistribution make_truncated_exponential(double mean, double support_max) {
  return LossDistribution::truncated_exponential(mean, support_max);
}
inline LossDistribution make_tabulated(std::vector<std::pair<double, double>> knots) {
  return LossDistribution::tabulated(std::move(knots));
}

// Two-column text file "x F(x)" (comma, tab or space separated). A
// non-numeric first line is treated as a header.
LossDistribution load_tabulated(const std::string& path);

}  // namespace bwrisk

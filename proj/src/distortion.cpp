#include "bwrisk/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bwrisk/errors.hpp"

namespace bwrisk {

DistortionFunction make_tvar_distortion(double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("tvar distortion: alpha must lie in (0,1)");
  const double w = 1.0 - alpha;
  DistortionFunction d;
  std::ostringstream os;
  os << "tvar(" << alpha << ")";
  d.name = os.str();
  d.g = [w](double t) { return std::clamp(t / w, 0.0, 1.0); };
  d.ginv = [w](double u) {
    if (u <= 0) return 0.0;
    if (u > 1.0 + 1e-15) return std::numeric_limits<double>::infinity();
    return std::min(u, 1.0) * w;
  };
  d.dg_right = [w](double t) { return t < w ? 1.0 / w : 0.0; };
  d.kinks = {w};
  return d;
}

DistortionFunction make_power_distortion(double r) {
  if (!(r > 0 && r <= 1)) throw DomainError("power distortion: exponent must lie in (0,1]");
  DistortionFunction d;
  std::ostringstream os;
  os << "power(" << r << ")";
  d.name = os.str();
  d.g = [r](double t) { return t <= 0 ? 0.0 : (t >= 1 ? 1.0 : std::pow(t, r)); };
  d.ginv = [r](double u) {
    if (u <= 0) return 0.0;
    if (u > 1.0 + 1e-15) return std::numeric_limits<double>::infinity();
    return std::pow(std::min(u, 1.0), 1.0 / r);
  };
  d.dg_right = [r](double t) {
    if (t >= 1.0) return 0.0;
    if (t <= 0.0) return r == 1.0 ? 1.0 : 1e300;
    return r * std::pow(t, r - 1.0);
  };
  return d;
}

void check_distortion(const DistortionFunction& d, int grid) {
  if (std::abs(d.g(0.0)) > 1e-15 || std::abs(d.g(1.0) - 1.0) > 1e-15)
    throw DomainError(d.name + ": need g(0)=0 and g(1)=1");
  for (int i = 0; i < grid; ++i) {
    const double a = double(i) / grid, b = double(i + 1) / grid;
    if (d.g(b) < d.g(a) - 1e-15) throw DomainError(d.name + ": g decreasing");
    if (d.g(0.5 * (a + b)) < 0.5 * (d.g(a) + d.g(b)) - 1e-12)
      throw DomainError(d.name + ": g not concave");
    const double t = 0.5 * (a + b), u = d.g(t);
    if (d.ginv(u) > t + 1e-12) throw DomainError(d.name + ": ginv(g(t)) > t");
    if (d.g(d.ginv(t)) < t - 1e-12) throw DomainError(d.name + ": g(ginv(u)) < u");
  }
}

}  // namespace bwrisk

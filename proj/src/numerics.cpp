#include "bwrisk/numerics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <queue>
#include <string>

#include "bwrisk/errors.hpp"

namespace bwrisk {

ValidationError::ValidationError(std::vector<std::string> items)
    : std::invalid_argument([&] {
        std::string msg = "validation failed:";
        for (const auto& s : items) msg += "\n  - " + s;
        return msg;
      }()),
      items_(std::move(items)) {}

namespace num {
namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const Fn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

std::vector<double> interior_points(std::vector<double> pts, double a, double b) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (double p : pts)
    if (std::isfinite(p) && p > a && p < b) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

QuadResult integrate_gk(const Fn& f, double a, double b,
                        const std::vector<double>& breakpoints,
                        const QuadOptions& opt) {
  QuadResult res;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }
  std::vector<double> cuts = interior_points(breakpoints, a, b);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);

  std::priority_queue<Panel> heap;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    Panel p = gk15(f, cuts[i], cuts[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int n = static_cast<int>(heap.size());
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
         n < opt.max_intervals && !heap.empty()) {
    Panel p = heap.top();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b) || (p.b - p.a) < 1e-15 * (1.0 + std::abs(p.a))) {
      // Panel cannot be split further; accept its contribution as is.
      break;
    }
    heap.pop();
    Panel l = gk15(f, p.a, mid);
    Panel r = gk15(f, mid, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // Re-sum in a fixed order to damp accumulated cancellation.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  double e2 = 0.0;
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  double s = 0.0;
  for (const auto& p : panels) {
    s += p.value;
    e2 += p.error;
  }
  res.value = s;
  res.error = e2;
  res.intervals = n;
  res.converged = e2 <= std::max(opt.abs_tol, opt.rel_tol * std::abs(s)) ||
                  e2 <= 1e3 * std::numeric_limits<double>::epsilon() *
                            (1.0 + std::abs(s));
  return res;
}

double integrate(const Fn& f, double a, double b,
                 const std::vector<double>& breakpoints, const QuadOptions& opt) {
  QuadResult r = integrate_gk(f, a, b, breakpoints, opt);
  if (!r.converged)
    throw NumericalError("quadrature did not converge on [" + std::to_string(a) +
                             ", " + std::to_string(b) + "], error estimate " +
                             std::to_string(r.error),
                         r.value);
  return r.value;
}

double gauss_legendre8(const Fn& f, double a, double b) {
  static constexpr double x[4] = {0.183434642495649804939476142360184,
                                  0.525532409916328985817739049189246,
                                  0.796666477413626739591553936475831,
                                  0.960289856497536231683560868569473};
  static constexpr double w[4] = {0.362683783378361982965150449277196,
                                  0.313706645877887287337962201986601,
                                  0.222381034453374470544355994426241,
                                  0.101228536290376259152531354309962};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return s * h;
}

double bisect_first_true(const std::function<bool(double)>& pred, double lo,
                         double hi, double tol, int max_iter) {
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double bisect_root(const Fn& f, double lo, double hi, double tol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw NumericalError("bisect_root: no sign change on bracket");
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

GoldenResult golden_max(const Fn& f, double a, double b, double tol, int max_iter) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

}  // namespace num
}  // namespace bwrisk

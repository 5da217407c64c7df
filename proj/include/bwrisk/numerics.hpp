#pragma once

#include <functional>
#include <vector>

namespace bwrisk::num {

using Fn = std::function<double(double)>;

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

// Globally adaptive Gauss-Kronrod (7/15) over [a, b], pre-split at the given
// breakpoints. Never throws.
QuadResult integrate_gk(const Fn& f, double a, double b,
                        const std::vector<double>& breakpoints = {},
                        const QuadOptions& opt = {});

// As integrate_gk but throws NumericalError (carrying the partial estimate)
// when the error budget is exhausted.
double integrate(const Fn& f, double a, double b,
                 const std::vector<double>& breakpoints = {},
                 const QuadOptions& opt = {});

// Fixed 8-point Gauss-Legendre rule on [a, b].
double gauss_legendre8(const Fn& f, double a, double b);

// Smallest x in [lo, hi] with pred(x) true, assuming pred is monotone
// (false then true) and pred(hi) is true. Returns an x where pred holds.
double bisect_first_true(const std::function<bool(double)>& pred, double lo,
                         double hi, double tol, int max_iter = 200);

// Root of a sign-changing function on [lo, hi] (f(lo) and f(hi) of opposite
// sign). Returns the endpoint of the final bracket closest to zero.
double bisect_root(const Fn& f, double lo, double hi, double tol,
                   int max_iter = 200);

struct GoldenResult {
  double x;
  double fx;
};

// Golden-section maximization of f on [a, b].
GoldenResult golden_max(const Fn& f, double a, double b, double tol,
                        int max_iter = 200);

// Sorted, de-duplicated copy of the points lying strictly inside (a, b).
std::vector<double> interior_points(std::vector<double> pts, double a, double b);

}  // namespace bwrisk::num

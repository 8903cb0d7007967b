#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace wavedecay::numerics {

using ScalarFn = std::function<double(double)>;

/// Fixed 10-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const ScalarFn& f, double a, double b);

/// Composite Gauss-Legendre with adaptive bisection of panels. The local
/// acceptance test compares one panel against its two halves.
double integrate(const ScalarFn& f, double a, double b, double rel_tol = 1e-9,
                 double abs_tol = 0.0, int max_depth = 48);

/// Root of an increasing function `f(x) = target` inside [lo, hi] by plain
/// bisection. `f(lo) <= target <= f(hi)` is assumed, not checked.
double bisect_increasing(const ScalarFn& f, double target, double lo, double hi,
                         int max_iter = 200);

/// Maximiser of a concave function on [lo, hi] by golden-section search.
/// Returns {argmax, max}.
struct Maximum {
  double arg;
  double value;
};
Maximum golden_maximize(const ScalarFn& f, double lo, double hi,
                        double rel_tol = 1e-12, int max_iter = 200);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double log10_a, double log10_b, std::size_t n);

/// Piecewise-linear interpolation on a sorted abscissa, clamped at the ends.
double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x);

inline bool is_finite(double x) { return std::isfinite(x); }

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace wavedecay::numerics

#include "wavedecay/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wavedecay::numerics {
namespace {

constexpr std::array<double, 5> kNodes = {
    0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
    0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kWeights = {
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};

double adapt(const ScalarFn& f, double a, double b, double whole, double tol,
             int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_legendre(f, a, mid);
  const double right = gauss_legendre(f, mid, b);
  const double sum = left + right;
  if (depth <= 0 || std::abs(sum - whole) <= tol || !std::isfinite(sum)) {
    return sum;
  }
  return adapt(f, a, mid, left, 0.5 * tol, depth - 1) +
         adapt(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double gauss_legendre(const ScalarFn& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double centre = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) {
    const double dx = half * kNodes[i];
    acc += kWeights[i] * (f(centre - dx) + f(centre + dx));
  }
  return acc * half;
}

double integrate(const ScalarFn& f, double a, double b, double rel_tol,
                 double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, rel_tol, abs_tol, max_depth);
  const double whole = gauss_legendre(f, a, b);
  // Two-level estimate of the magnitude so the relative tolerance is global.
  const double mid = 0.5 * (a + b);
  const double refined = gauss_legendre(f, a, mid) + gauss_legendre(f, mid, b);
  const double scale = std::max(std::abs(refined), std::abs(whole));
  const double tol = std::max(abs_tol, rel_tol * scale);
  if (tol == 0.0) return refined;
  return adapt(f, a, b, whole, tol, max_depth);
}

double bisect_increasing(const ScalarFn& f, double target, double lo, double hi,
                         int max_iter) {
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Maximum golden_maximize(const ScalarFn& f, double lo, double hi, double rel_tol,
                        int max_iter) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter; ++i) {
    if (hi - lo <= rel_tol * std::max(std::abs(lo) + std::abs(hi), 1e-300)) break;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  // The bracket endpoints can beat the interior probes for monotone pieces.
  Maximum best{x1, f1};
  if (f2 > best.value) best = {x2, f2};
  const double flo = f(lo);
  if (flo > best.value) best = {lo, flo};
  const double fhi = f(hi);
  if (fhi > best.value) best = {hi, fhi};
  return best;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> logspace(double log10_a, double log10_b, std::size_t n) {
  auto exps = linspace(log10_a, log10_b, n);
  for (auto& e : exps) e = std::pow(10.0, e);
  return exps;
}

double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
  if (xs.empty()) return 0.0;
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto j = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + w * (ys[j] - ys[j - 1]);
}

}  // namespace wavedecay::numerics

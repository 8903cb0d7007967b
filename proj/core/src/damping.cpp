#include "wavedecay/damping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

// h0 = s^q on [0, 1] continued by its tangent line at 1, so it stays concave
// and strictly increasing on all of [0, inf).
double power_h0(double s, double q) {
  if (s <= 0.0) return 0.0;
  if (s <= 1.0) return std::pow(s, q);
  return 1.0 + q * (s - 1.0);
}

double power_h0_inv(double y, double q) {
  if (y <= 0.0) return 0.0;
  if (y <= 1.0) return std::pow(y, 1.0 / q);
  return 1.0 + (y - 1.0) / q;
}

// h0^{-1}(s) = s^{3/2} e^{-1/s}.
double superlinear_h0_inv(double s) {
  if (s <= 0.0) return 0.0;
  return std::pow(s, 1.5) * std::exp(-1.0 / s);
}

// Solves 1.5 x - e^{-x} = ln y for x = ln s. The left side is increasing and
// concave, so Newton iterates from a point below the root climb to it
// monotonically. For ln y < -1 the start -ln(-ln y) is such a point.
double superlinear_h0(double y) {
  if (y <= 0.0) return 0.0;
  if (std::isinf(y)) return kInf;
  const double target = std::log(y);
  double x = target < -1.0 ? -std::log(-target) : target / 1.5;
  for (int it = 0; it < 200; ++it) {
    const double e = std::exp(-x);
    const double f = 1.5 * x - e - target;
    const double step = f / (1.5 + e);
    x -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return std::exp(x);
}

}  // namespace

DampingLaw::DampingLaw(Kind kind, double r0, double q, double m, double eta,
                       std::shared_ptr<const Table> table)
    : kind_(kind), r0_(r0), q_(q), m_(m), eta_(eta), table_(std::move(table)) {}

DampingLaw DampingLaw::linear() { return DampingLaw(Kind::linear, 1.0, 1.0, 1.0, 1.0, nullptr); }

DampingLaw DampingLaw::sublinear(double r0) {
  if (!(r0 > 0.0 && r0 < 1.0)) {
    throw InvalidArgument("sublinear exponent r0 must lie in (0, 1)");
  }
  return DampingLaw(Kind::sublinear, r0, 2.0 * r0 / (1.0 + r0), 1.0, 1.0, nullptr);
}

DampingLaw DampingLaw::superlinear() {
  return DampingLaw(Kind::superlinear, 0.0, 0.0, std::exp(1.0), 1.0, nullptr);
}

DampingLaw DampingLaw::from_table(std::vector<double> s, std::vector<double> g,
                                  double h0_exponent) {
  if (s.size() != g.size() || s.size() < 2) {
    throw InvalidArgument("damping table needs at least two (s, g) rows");
  }
  if (!(h0_exponent > 0.0 && h0_exponent <= 1.0)) {
    throw InvalidArgument("h0 exponent must lie in (0, 1]");
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s[k]) || !std::isfinite(g[k])) {
      throw InvalidArgument("damping table contains non-finite values");
    }
    if (k > 0 && !(s[k] > s[k - 1])) {
      throw InvalidArgument("damping table abscissae must be strictly increasing");
    }
    if (k > 0 && g[k] < g[k - 1]) {
      throw InvalidArgument("damping table is not monotone");
    }
  }
  // Odd extension of a one-sided table.
  if (s.front() >= 0.0) {
    std::vector<double> fs, fg;
    for (std::size_t k = s.size(); k-- > 0;) {
      if (s[k] > 0.0) {
        fs.push_back(-s[k]);
        fg.push_back(-g[k]);
      }
    }
    fs.insert(fs.end(), s.begin(), s.end());
    fg.insert(fg.end(), g.begin(), g.end());
    s = std::move(fs);
    g = std::move(fg);
  }
  const auto zero = std::find(s.begin(), s.end(), 0.0);
  if (zero == s.end() || g[static_cast<std::size_t>(zero - s.begin())] != 0.0) {
    throw InvalidArgument("damping table must contain the knot (0, 0)");
  }
  const double eta = std::max(std::abs(s.front()), std::abs(s.back()));
  auto table = std::make_shared<Table>(Table{std::move(s), std::move(g)});
  DampingLaw law(Kind::table, 0.0, h0_exponent, 1.0, eta, table);
  // Envelope constant from the linear extrapolation beyond the last knots.
  double m = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double x = eta * (1.0 + 9.0 * k / 200.0);
    for (double sx : {x, -x}) {
      const double ratio = law.g(sx) / sx;
      if (!(ratio > 0.0)) {
        throw InvalidArgument("damping table must grow linearly beyond its last knot");
      }
      m = std::max({m, ratio, 1.0 / ratio});
    }
  }
  law.m_ = m;
  return law;
}

DampingLaw DampingLaw::from_csv(const std::string& path, double h0_exponent) {
  const auto cols = read_numeric_csv(path, 2);
  return from_table(cols[0], cols[1], h0_exponent);
}

std::string DampingLaw::name() const {
  switch (kind_) {
    case Kind::linear:
      return "linear";
    case Kind::sublinear:
      return "sublinear";
    case Kind::superlinear:
      return "superlinear";
    case Kind::table:
      return "table";
  }
  return "unknown";
}

const std::vector<double>& DampingLaw::table_s() const {
  static const std::vector<double> empty;
  return table_ ? table_->s : empty;
}

const std::vector<double>& DampingLaw::table_g() const {
  static const std::vector<double> empty;
  return table_ ? table_->g : empty;
}

double DampingLaw::table_g(double s) const {
  const auto& xs = table_->s;
  const auto& ys = table_->g;
  std::size_t k;
  if (s <= xs.front()) {
    k = 0;
  } else if (s >= xs.back()) {
    k = xs.size() - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), s) - xs.begin()) - 1;
  }
  const double slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + slope * (s - xs[k]);
}

double DampingLaw::table_dg(double s) const {
  const auto& xs = table_->s;
  const auto& ys = table_->g;
  std::size_t k;
  if (s <= xs.front()) {
    k = 0;
  } else if (s >= xs.back()) {
    k = xs.size() - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), s) - xs.begin()) - 1;
  }
  return (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
}

double DampingLaw::g(double s) const {
  switch (kind_) {
    case Kind::linear:
      return s;
    case Kind::sublinear: {
      const double a = std::abs(s);
      return a <= 1.0 ? sgn(s) * std::pow(a, r0_) : s;
    }
    case Kind::superlinear: {
      const double a = std::abs(s);
      if (a == 0.0) return 0.0;
      return a < 1.0 ? sgn(s) * a * a * std::exp(-1.0 / (a * a)) : s / std::exp(1.0);
    }
    case Kind::table:
      return table_g(s);
  }
  return 0.0;
}

double DampingLaw::dg(double s) const {
  switch (kind_) {
    case Kind::linear:
      return 1.0;
    case Kind::sublinear: {
      const double a = std::abs(s);
      if (a == 0.0) return kInf;
      return a <= 1.0 ? r0_ * std::pow(a, r0_ - 1.0) : 1.0;
    }
    case Kind::superlinear: {
      const double a = std::abs(s);
      if (a == 0.0) return 0.0;
      if (a >= 1.0) return 1.0 / std::exp(1.0);
      return (2.0 * a + 2.0 / a) * std::exp(-1.0 / (a * a));
    }
    case Kind::table:
      return table_dg(s);
  }
  return 0.0;
}

double DampingLaw::h0(double s) const {
  switch (kind_) {
    case Kind::linear:
      return std::max(s, 0.0);
    case Kind::superlinear:
      return superlinear_h0(s);
    case Kind::sublinear:
    case Kind::table:
      return power_h0(s, q_);
  }
  return 0.0;
}

double DampingLaw::h0_inv(double y) const {
  switch (kind_) {
    case Kind::linear:
      return std::max(y, 0.0);
    case Kind::superlinear:
      return superlinear_h0_inv(y);
    case Kind::sublinear:
    case Kind::table:
      return power_h0_inv(y, q_);
  }
  return 0.0;
}

double sampled_epsilon0(const DampingLaw& law, int samples) {
  if (samples < 1) throw InvalidArgument("need at least one sample");
  double eps = kInf;
  for (int k = 1; k <= samples; ++k) {
    const double s = law.eta() * static_cast<double>(k) / samples;
    for (double x : {s, -s}) {
      const double gx = law.g(x);
      const double denom = x * x + gx * gx;
      const double num = law.h0(gx * x);
      if (denom > 0.0 && num > 0.0) eps = std::min(eps, num / denom);
    }
  }
  return std::isinf(eps) ? 0.0 : eps;
}

HFunction::HFunction(DampingLaw law, double damper_mass)
    : law_(std::move(law)), mass_(damper_mass) {
  if (!(damper_mass > 0.0) || !std::isfinite(damper_mass)) {
    throw InvalidArgument("damper mass must be positive");
  }
}

double HFunction::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  return x + mass_ * law_.h0(x / mass_);
}

double HFunction::inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (std::isinf(y)) return y;
  if (law_.kind() == DampingLaw::Kind::linear) return 0.5 * y;
  // Write x = mass * h0^{-1}(s); then h(x) = mass * (h0^{-1}(s) + s), which is
  // increasing in s and bracketed by s in [0, y / mass]. Illinois false
  // position on that bracket.
  const double target = y / mass_;
  auto f = [&](double s) { return law_.h0_inv(s) + s - target; };
  double lo = 0.0;
  double hi = target;
  double f_lo = -target;
  double f_hi = f(hi);
  if (f_hi <= 0.0) return mass_ * law_.h0_inv(hi);
  int side = 0;
  for (int it = 0; it < kMaxIterations; ++it) {
    double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mass_ * law_.h0_inv(mid);
    if (f_mid < 0.0) {
      lo = mid;
      f_lo = f_mid;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      f_hi = f_mid;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return mass_ * law_.h0_inv(0.5 * (lo + hi));
}

double implicit_damp_solve(const DampingLaw& law, double weight, double rhs) {
  if (weight == 0.0 || rhs == 0.0) return rhs;
  if (law.kind() == DampingLaw::Kind::linear) return rhs / (1.0 + weight);

  const double tol = 1e-12 * (1.0 + std::abs(rhs));
  auto residual = [&](double v) { return v + weight * law.g(v) - rhs; };
  double lo = std::min(0.0, rhs);
  double hi = std::max(0.0, rhs);
  double v = rhs / (1.0 + weight * std::max(law.dg(rhs), 0.0));
  if (!(v > lo && v < hi)) v = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = residual(v);
    if (std::abs(r) <= tol) return v;
    if (r > 0.0) {
      hi = v;
    } else {
      lo = v;
    }
    const double d = 1.0 + weight * law.dg(v);
    double next = v - r / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == v) break;
    v = next;
  }
  return v;
}

}  // namespace wavedecay

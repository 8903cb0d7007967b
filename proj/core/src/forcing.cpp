#include "wavedecay/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bump(double x, double centre, double width) {
  const double r = (x - centre) / width;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double shape_factor(const ShapeSpec& spec, double x, double length) {
  if (spec.kind == ShapeSpec::Kind::sine) {
    return std::sin(spec.mode * std::numbers::pi * x / length);
  }
  return bump(x, spec.centre * length, spec.width * length);
}

void check_profile_params(double M, double theta) {
  if (!std::isfinite(M)) throw InvalidArgument("forcing amplitude must be finite");
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw InvalidArgument("forcing decay exponent must be nonnegative");
  }
}

}  // namespace

TimeProfile TimeProfile::zero() { return {}; }

TimeProfile TimeProfile::exponential(double M, double theta) {
  check_profile_params(M, theta);
  TimeProfile p;
  p.kind = M == 0.0 ? Kind::zero : Kind::exponential;
  p.M = M;
  p.theta = theta;
  return p;
}

TimeProfile TimeProfile::polynomial(double M, double theta) {
  check_profile_params(M, theta);
  TimeProfile p;
  p.kind = M == 0.0 ? Kind::zero : Kind::polynomial;
  p.M = M;
  p.theta = theta;
  return p;
}

TimeProfile TimeProfile::table(std::vector<double> t, std::vector<double> rho) {
  if (t.size() != rho.size() || t.empty()) {
    throw InvalidArgument("forcing table needs matching, nonempty columns");
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || !std::isfinite(rho[k])) {
      throw InvalidArgument("forcing table contains non-finite values");
    }
    if (k > 0 && !(t[k] > t[k - 1])) {
      throw InvalidArgument("forcing table times must be strictly increasing");
    }
  }
  TimeProfile p;
  p.kind = Kind::table;
  p.times = std::move(t);
  p.values = std::move(rho);
  return p;
}

TimeProfile TimeProfile::from_csv(const std::string& path) {
  auto cols = read_numeric_csv(path, 2);
  return table(std::move(cols[0]), std::move(cols[1]));
}

double TimeProfile::operator()(double t) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::exponential:
      return M * std::exp(-theta * t);
    case Kind::polynomial:
      return M * std::pow(1.0 + t, -theta);
    case Kind::table:
      return numerics::interp_linear(times, values, t);
  }
  return 0.0;
}

double TimeProfile::sup_abs() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::exponential:
    case Kind::polynomial:
      return std::abs(M);
    case Kind::table: {
      double s = 0.0;
      for (double v : values) s = std::max(s, std::abs(v));
      return s;
    }
  }
  return 0.0;
}

std::string TimeProfile::name() const {
  switch (kind) {
    case Kind::zero:
      return "zero";
    case Kind::exponential:
      return "exponential";
    case Kind::polynomial:
      return "polynomial";
    case Kind::table:
      return "table";
  }
  return "unknown";
}

ForcingTerm ForcingTerm::zero(const Grid& grid) {
  ForcingTerm f;
  f.shape_.assign(grid.node_count(), 0.0);
  return f;
}

ForcingTerm ForcingTerm::separable(const Grid& grid, TimeProfile rho,
                                   const ShapeSpec& shape) {
  if (shape.kind == ShapeSpec::Kind::sine && shape.mode < 1) {
    throw InvalidArgument("sine shape mode must be at least 1");
  }
  if (shape.kind == ShapeSpec::Kind::bump && !(shape.width > 0.0)) {
    throw InvalidArgument("bump width must be positive");
  }
  std::vector<double> phi(grid.node_count(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.is_boundary(k)) continue;
      double v = shape_factor(shape, grid.x(i), grid.length());
      if (grid.dimension() == 2) v *= shape_factor(shape, grid.y(j), grid.length2());
      phi[k] = v;
      sum += v * v;
    }
  }
  sum *= grid.cell_volume();
  if (!(sum > 0.0)) throw InvalidArgument("forcing shape vanishes on the grid");
  const double inv = 1.0 / std::sqrt(sum);
  for (auto& v : phi) v *= inv;

  ForcingTerm f;
  f.zero_ = rho.kind == TimeProfile::Kind::zero ||
            (rho.kind == TimeProfile::Kind::table && rho.sup_abs() == 0.0);
  f.profile_ = std::move(rho);
  f.shape_ = std::move(phi);
  return f;
}

ForcingTerm ForcingTerm::tabulated(const Grid& grid, std::vector<double> times,
                                   std::vector<std::vector<double>> rows) {
  if (grid.dimension() != 1) {
    throw InvalidArgument("tabulated force fields are supported in 1D only");
  }
  if (times.empty() || times.size() != rows.size()) {
    throw InvalidArgument("force field needs one row per time");
  }
  bool any = false;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw InvalidArgument("force field times must be strictly increasing");
    }
    if (rows[k].size() != grid.node_count()) {
      throw InvalidArgument("force field row has " + std::to_string(rows[k].size()) +
                            " values, grid has " + std::to_string(grid.node_count()) +
                            " nodes");
    }
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (!std::isfinite(rows[k][i])) {
        throw InvalidArgument("force field contains non-finite values");
      }
      if (grid.is_boundary(i)) {
        rows[k][i] = 0.0;
      } else if (rows[k][i] != 0.0) {
        any = true;
      }
    }
  }
  ForcingTerm f;
  f.field_ = std::make_shared<Field>(
      Field{std::move(times), std::move(rows), grid.cell_volume()});
  f.shape_.assign(grid.node_count(), 0.0);
  f.zero_ = !any;
  return f;
}

ForcingTerm ForcingTerm::from_field_csv(const Grid& grid, const std::string& path) {
  const auto cols = read_numeric_csv(path, 2);
  const std::size_t n = cols.front().size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(cols.size() - 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 1; c < cols.size(); ++c) rows[r][c - 1] = cols[c][r];
  }
  return tabulated(grid, cols[0], std::move(rows));
}

void ForcingTerm::evaluate(double t, std::vector<double>& out) const {
  out.resize(shape_.size());
  if (zero_) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (!field_) {
    const double r = profile_(t);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = r * shape_[k];
    return;
  }
  const auto& ts = field_->times;
  const auto& rows = field_->rows;
  if (t <= ts.front() || ts.size() == 1) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = field_scale_ * rows.front()[k];
    return;
  }
  if (t >= ts.back()) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = field_scale_ * rows.back()[k];
    return;
  }
  const auto j = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = field_scale_ * ((1.0 - w) * rows[j - 1][k] + w * rows[j][k]);
  }
}

double ForcingTerm::norm_sq(double t) const {
  if (zero_) return 0.0;
  if (!field_) {
    const double r = profile_(t);
    return r * r;
  }
  std::vector<double> tmp;
  evaluate(t, tmp);
  double s = 0.0;
  for (double v : tmp) s += v * v;
  return s * field_->cell_volume;
}

double ForcingTerm::norm(double t) const { return std::sqrt(norm_sq(t)); }

double ForcingTerm::max_norm() const {
  if (zero_) return 0.0;
  if (!field_) return profile_.sup_abs();
  double best = 0.0;
  for (double t : field_->times) best = std::max(best, norm(t));
  return best;
}

ForcingTerm ForcingTerm::scaled(double factor) const {
  if (!std::isfinite(factor)) throw InvalidArgument("force scale must be finite");
  ForcingTerm f = *this;
  if (field_) {
    f.field_scale_ *= factor;
  } else {
    f.profile_.M *= factor;
    for (auto& v : f.profile_.values) v *= factor;
  }
  if (factor == 0.0) f.zero_ = true;
  return f;
}

GammaProfile::GammaProfile() : kind_(Kind::custom), label_("zero"), zero_(true) {}

GammaProfile::GammaProfile(std::function<double(double)> fn, Kind kind,
                           std::string label)
    : fn_(std::make_shared<const std::function<double(double)>>(std::move(fn))),
      kind_(kind),
      label_(std::move(label)),
      zero_(false) {}

GammaProfile GammaProfile::zero() { return {}; }

GammaProfile GammaProfile::power_law(double M, double theta) {
  if (!(M >= 0.0)) throw InvalidArgument("Gamma amplitude must be nonnegative");
  if (M == 0.0) return zero();
  return GammaProfile([M, theta](double t) { return M * std::pow(1.0 + t, -theta); },
                      Kind::custom, "power_law");
}

GammaProfile GammaProfile::exponential(double M, double theta) {
  if (!(M >= 0.0)) throw InvalidArgument("Gamma amplitude must be nonnegative");
  if (M == 0.0) return zero();
  return GammaProfile([M, theta](double t) { return M * std::exp(-theta * t); },
                      Kind::custom, "exponential");
}

GammaProfile GammaProfile::constant(double c) {
  if (!(c >= 0.0)) throw InvalidArgument("Gamma must be nonnegative");
  if (c == 0.0) return zero();
  return GammaProfile([c](double) { return c; }, Kind::custom, "constant");
}

double convex_conjugate(const std::function<double(double)>& f, double s) {
  if (s <= 0.0) return 0.0;
  auto obj = [&](double y) { return s * y - f(y); };
  double y = 1.0;
  if (obj(2.0) > obj(1.0)) {
    y = 2.0;
    while (obj(2.0 * y) > obj(y)) {
      y *= 2.0;
      if (y > 1e300) return kInf;
    }
  } else {
    while (y > 1e-300 && obj(0.5 * y) >= obj(y)) y *= 0.5;
    if (y <= 1e-300) return std::max(0.0, obj(y));
  }
  const auto best = numerics::golden_maximize(obj, 0.5 * y, 2.0 * y, 1e-12);
  return std::max(0.0, best.value);
}

ConjugatePair::ConjugatePair(double T, double C_T, HFunction h)
    : T_(T), C_T_(C_T), scale_(0.0), h_(std::move(h)) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (!(C_T >= 1.0)) throw InvalidArgument("C_T must be at least 1");
  scale_ = 1.0 / (8.0 * C_T * std::exp(T));
  double prev = h_(0.0);
  if (prev != 0.0) throw InvalidArgument("h must vanish at 0");
  for (double y : numerics::logspace(-12.0, 12.0, 97)) {
    const double v = h_(y);
    if (!(v > prev) || !std::isfinite(v)) {
      throw InvalidArgument("h is not strictly increasing");
    }
    prev = v;
  }
}

double ConjugatePair::psi(double y) const {
  if (y < 0.0) return kInf;
  return h_.inverse(y * y * scale_) / (2.0 * T_);
}

double ConjugatePair::psi_star(double s) const {
  return convex_conjugate([this](double y) { return psi(y); }, s);
}

double ConjugatePair::psi_star_star(double y) const {
  return convex_conjugate([this](double s) { return psi_star(s); }, y);
}

TabulatedConjugate::TabulatedConjugate(const ConjugatePair& pair, double s_max)
    : pair_(std::make_shared<const ConjugatePair>(pair)), s_max_(s_max) {
  if (!(s_max > 0.0) || !std::isfinite(s_max)) {
    throw InvalidArgument("conjugate table range must be positive");
  }
  constexpr int kPerDecade = 64;
  constexpr int kDecades = 12;
  const double top = std::log(s_max);
  const double step = std::log(10.0) / kPerDecade;
  for (int k = kPerDecade * kDecades; k >= 0; --k) {
    const double ls = top - k * step;
    const double v = pair_->psi_star(std::exp(ls));
    if (std::isinf(v)) {
      throw NumericalError("psi* diverges on the range of the force");
    }
    log_s_.push_back(ls);
    log_v_.push_back(v > 0.0 ? std::log(v) : -kInf);
  }
}

double TabulatedConjugate::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  const double ls = std::log(s);
  if (ls < log_s_.front() || s > s_max_) return pair_->psi_star(s);
  const auto it = std::upper_bound(log_s_.begin(), log_s_.end(), ls);
  if (it == log_s_.end()) return std::exp(log_v_.back());
  const auto j = static_cast<std::size_t>(it - log_s_.begin());
  const double a = log_v_[j - 1];
  const double b = log_v_[j];
  const double w = (ls - log_s_[j - 1]) / (log_s_[j] - log_s_[j - 1]);
  if (std::isinf(a) || std::isinf(b)) {
    const double va = std::isinf(a) ? 0.0 : std::exp(a);
    const double vb = std::isinf(b) ? 0.0 : std::exp(b);
    return va + w * (vb - va);
  }
  return std::exp(a + w * (b - a));
}

GammaProfile gamma_linear(const ForcingTerm& f, double C1T) {
  if (!(C1T >= 1.0)) throw InvalidArgument("C1T must be at least 1");
  if (f.identically_zero()) return GammaProfile::zero();
  return GammaProfile([f, C1T](double t) { return C1T * f.norm_sq(t); },
                      GammaProfile::Kind::linear, "linear");
}

GammaProfile gamma_nonlinear(const ForcingTerm& f, const ConjugatePair& pair) {
  if (f.identically_zero()) return GammaProfile::zero();
  const TabulatedConjugate table(pair, f.max_norm());
  return GammaProfile(
      [f, table](double t) {
        const double n2 = f.norm_sq(t);
        return 2.0 * n2 + table(std::sqrt(n2));
      },
      GammaProfile::Kind::nonlinear, "nonlinear");
}

double window_integral(const GammaProfile& gamma, double t, double T) {
  if (!(t >= 0.0)) throw InvalidArgument("window start must be nonnegative");
  if (!(T > 0.0)) throw InvalidArgument("window length must be positive");
  if (gamma.identically_zero()) return 0.0;
  return numerics::integrate([&](double s) { return gamma(s); }, t, t + T, 1e-9);
}

}  // namespace wavedecay

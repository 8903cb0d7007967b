#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wavedecay/damping.hpp"
#include "wavedecay/geometry.hpp"

namespace wavedecay {

/// Time profile rho(t) of a separable force.
struct TimeProfile {
  enum class Kind { zero, exponential, polynomial, table };

  static TimeProfile zero();
  /// M e^{-theta t}
  static TimeProfile exponential(double M, double theta);
  /// M (1 + t)^{-theta}
  static TimeProfile polynomial(double M, double theta);
  /// Piecewise-linear through (t, rho) knots, held constant past the ends.
  static TimeProfile table(std::vector<double> t, std::vector<double> rho);
  static TimeProfile from_csv(const std::string& path);

  double operator()(double t) const;
  /// sup |rho| over t >= 0.
  double sup_abs() const;
  std::string name() const;

  Kind kind = Kind::zero;
  double M = 0.0;
  double theta = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};

/// Spatial shape of a separable force before normalization.
struct ShapeSpec {
  enum class Kind { sine, bump };
  Kind kind = Kind::sine;
  int mode = 1;          // sine: sin(mode pi x / L) (times the y factor in 2D)
  double centre = 0.5;   // bump: fraction of the length
  double width = 0.25;   // bump: half-width as fraction of the length
};

/// External force f(t, x) on the grid nodes. Either separable rho(t) phi(x)
/// with dx * sum(phi^2) = 1, or a tabulated 1D field linearly interpolated
/// in time.
class ForcingTerm {
 public:
  ForcingTerm() = default;

  static ForcingTerm zero(const Grid& grid);
  static ForcingTerm separable(const Grid& grid, TimeProfile rho, const ShapeSpec& shape);
  /// rows[k] holds nodal values at times[k]; boundary values are ignored.
  static ForcingTerm tabulated(const Grid& grid, std::vector<double> times,
                               std::vector<std::vector<double>> rows);
  /// CSV rows `t, f_0, ..., f_n` on a 1D grid.
  static ForcingTerm from_field_csv(const Grid& grid, const std::string& path);

  bool is_separable() const { return !field_; }
  bool identically_zero() const { return zero_; }

  double rho(double t) const { return profile_(t); }
  const TimeProfile& profile() const { return profile_; }
  const std::vector<double>& shape() const { return shape_; }

  /// Nodal values at time t (boundary nodes zero).
  void evaluate(double t, std::vector<double>& out) const;

  /// L2 norm of f(t, .) in space.
  double norm(double t) const;
  double norm_sq(double t) const;

  /// sup over t >= 0 of norm(t).
  double max_norm() const;

  /// Same force multiplied by a constant.
  ForcingTerm scaled(double factor) const;

 private:
  struct Field {
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    double cell_volume = 0.0;
  };

  TimeProfile profile_;
  std::vector<double> shape_;
  std::shared_ptr<const Field> field_;
  double field_scale_ = 1.0;
  bool zero_ = true;
};

/// Forcing magnitude Gamma(t) >= 0 feeding the comparison ODE.
class GammaProfile {
 public:
  enum class Kind { linear, nonlinear, custom };

  GammaProfile();
  GammaProfile(std::function<double(double)> fn, Kind kind, std::string label);

  static GammaProfile zero();
  static GammaProfile power_law(double M, double theta);   // M (1+t)^{-theta}
  static GammaProfile exponential(double M, double theta); // M e^{-theta t}
  static GammaProfile constant(double c);

  double operator()(double t) const { return zero_ ? 0.0 : (*fn_)(t); }
  bool identically_zero() const { return zero_; }
  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }

 private:
  std::shared_ptr<const std::function<double(double)>> fn_;
  Kind kind_;
  std::string label_;
  bool zero_;
};

/// Legendre-Fenchel pair for the nonlinear pipeline:
/// psi(y) = h^{-1}(y^2 / (8 C_T e^T)) / (2T) on y >= 0, +inf for y < 0, and
/// psi*(s) = sup_{y >= 0} [s y - psi(y)].
class ConjugatePair {
 public:
  ConjugatePair(double T, double C_T, HFunction h);

  double psi(double y) const;
  /// +inf when the supremum is unbounded.
  double psi_star(double s) const;
  /// Biconjugate sup_{s >= 0} [s y - psi*(s)].
  double psi_star_star(double y) const;

  double T() const { return T_; }
  double C_T() const { return C_T_; }
  const HFunction& h() const { return h_; }

 private:
  double T_;
  double C_T_;
  double scale_;  // 1 / (8 C_T e^T)
  HFunction h_;
};

/// sup_{y >= 0} [s y - f(y)] for convex f with f(0) = 0, found by geometric
/// bracketing followed by golden-section search. Returns +inf if the
/// objective keeps increasing up to 1e300.
double convex_conjugate(const std::function<double(double)>& f, double s);

/// psi* on [0, s_max] tabulated on a log grid (64 points per decade, down to
/// 1e-12 s_max) and interpolated linearly in log-log coordinates.
class TabulatedConjugate {
 public:
  TabulatedConjugate(const ConjugatePair& pair, double s_max);
  double operator()(double s) const;

 private:
  std::shared_ptr<const ConjugatePair> pair_;
  std::vector<double> log_s_;
  std::vector<double> log_v_;
  double s_max_;
};

/// Gamma(t) = C1T * |f(t)|^2.
GammaProfile gamma_linear(const ForcingTerm& f, double C1T);

/// Gamma(t) = 2 |f(t)|^2 + psi*(|f(t)|).
GammaProfile gamma_nonlinear(const ForcingTerm& f, const ConjugatePair& pair);

/// delta(t) = integral of Gamma over [t, t + T].
double window_integral(const GammaProfile& gamma, double t, double T);

}  // namespace wavedecay

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wavedecay/damping.hpp"
#include "wavedecay/fit.hpp"
#include "wavedecay/forcing.hpp"

namespace wavedecay {

/// Increasing map p with p(0) = 0 driving S' + p(S) = Gamma.
class DissipationMap {
 public:
  enum class Kind { linear, power, superlinear, calibrated, custom };

  /// p(s) = C s
  static DissipationMap linear(double C);
  /// p(s) = C s^gamma
  static DissipationMap power(double C, double gamma);
  /// p(s) = C s^{3/2} e^{-1/s}
  static DissipationMap superlinear(double C);
  /// Linear pipeline: p(s) = s / (T C_T).
  static DissipationMap linear_pipeline(double T, double C_T);
  /// Nonlinear pipeline: p(s) = h^{-1}(s / K) / (4T).
  static DissipationMap nonlinear_pipeline(double T, double K, const HFunction& h);
  static DissipationMap custom(std::function<double(double)> p, std::string label);

  double operator()(double s) const;
  double inverse(double y) const;

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  /// Slope of a linear map, exponent of a power map.
  double coefficient() const { return C_; }
  double exponent() const { return gamma_; }

 private:
  DissipationMap(Kind kind, double C, double gamma, std::string label);

  Kind kind_;
  double C_ = 1.0;
  double gamma_ = 1.0;
  double T_ = 1.0;
  double K_ = 1.0;
  std::shared_ptr<const HFunction> h_;
  std::shared_ptr<const std::function<double(double)>> fn_;
  std::string label_;
};

struct OdeProblem {
  DissipationMap p;
  GammaProfile gamma;
  double S0 = 0.0;
};

/// Accepted integrator knots with cubic Hermite interpolation in between.
class SampledCurve {
 public:
  SampledCurve() = default;
  SampledCurve(std::vector<double> t, std::vector<double> y, std::vector<double> dy);

  double operator()(double t) const;
  double t_min() const { return t_.empty() ? 0.0 : t_.front(); }
  double t_max() const { return t_.empty() ? 0.0 : t_.back(); }
  std::size_t knots() const { return t_.size(); }

 private:
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> dy_;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<double> S;
  std::vector<double> gamma;
  SampledCurve dense;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Classical RK4 with step-doubling error control. Output is on the uniform
/// grid 0, dt, 2 dt, ... (plus the horizon); internal steps never cross an
/// output point and S is kept nonnegative.
OdeSolution solve_ode(const OdeProblem& problem, double horizon, double dt,
                      double rel_tol = 1e-8);

/// Same, but reporting S at caller-chosen increasing times.
OdeSolution solve_ode_at(const OdeProblem& problem, const std::vector<double>& times,
                         double rel_tol = 1e-8);

/// B(t) = 4 e^T (S(t - T) + factor * delta(t - T)) sampled at t >= T.
struct BoundCurve {
  std::vector<double> t;
  std::vector<double> B;
};

BoundCurve envelope(const SampledCurve& S, const GammaProfile& gamma, double T,
                    double horizon, const std::vector<double>& times,
                    double factor = 1.0);

/// W_{m+1} = W_m + delta_m - l(W_m + delta_m), m = 0 .. steps - 1.
std::vector<double> discrete_iteration(double W0, const std::function<double(double)>& l,
                                       const std::vector<double>& delta,
                                       std::size_t steps);

struct DominanceResult {
  bool pass = true;
  double max_violation = 0.0;
  double location = 0.0;
  double tolerance = 0.0;
};

/// Checks y >= S - 1e-8 (1 + max S) pointwise on a shared grid.
DominanceResult dominance_check(const std::vector<double>& t, const std::vector<double>& S,
                                const std::vector<double>& y);

/// psi(x) = integral of 1/p over [x, X] together with its inverse. Built on a
/// log grid below X until psi exceeds tau_max.
class InversePsi {
 public:
  InversePsi(DissipationMap p, double X, double tau_max);

  double psi(double x) const;
  /// x with psi(x) = tau; X for tau <= 0, 0 if tau lies beyond underflow.
  double inverse(double tau) const;

 private:
  double local_integral(double x, double x_hi) const;
  /// Newton solve of psi(x) = tau inside the panel [xb, xa].
  double refine(double tau, double psi_a, double xa, double xb) const;

  DissipationMap p_;
  double X_;
  bool exhausted_ = false;
  std::vector<double> x_;    // decreasing
  std::vector<double> psi_;  // increasing
};

enum class DecayCase { unforced, forced_subdominant, forced_dominant, unclassified };

std::string to_string(DecayCase c);

struct Admissibility {
  double c = 0.0;
  double kappa = 0.0;
  double m = 0.0;
  /// Range of -(d/dt p^{-1}(Gamma)) / Gamma over the sample grid.
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  bool differential_ok = false;
  bool kappa_ok = false;
  bool initial_ok = false;
  std::string diagnostics;
};

struct PredictedForm {
  bool valid = false;
  DecayModel model = DecayModel::exponential;
  double parameter = 0.0;
};

struct DecayClassification {
  DecayCase tag = DecayCase::unclassified;
  Admissibility admissibility;
  PredictedForm prediction;
  /// Upper bound for S(t); empty when unclassified.
  std::function<double(double)> bound;
};

struct ClassifyOptions {
  double horizon = 100.0;
  std::size_t samples = 801;
  /// Window used to read the decay form off the bound; defaults to the
  /// second half of the horizon.
  double fit_t0 = -1.0;
  double fit_t1 = -1.0;
};

/// Homogeneity constant inf p(Kx) / (p(K) p(x)) over K in [1, 1e6] and
/// x in (0, range] on log grids.
double homogeneity_constant(const DissipationMap& p, double range);

DecayClassification classify(const DissipationMap& p, const GammaProfile& gamma,
                             double S0, const ClassifyOptions& options = {});

/// Forcing families with closed-form rates in the linear case.
struct GammaForm {
  enum class Kind { exponential, polynomial };
  Kind kind = Kind::exponential;
  double M = 1.0;
  double theta = 1.0;
};

struct RateEnvelope {
  DecayModel model = DecayModel::exponential;
  /// Rate (exponential) or exponent (polynomial).
  double parameter = 0.0;
  /// Multiplicative constant fitted to the integrating-factor solution.
  double constant = 0.0;
  /// Shape without the constant, e.g. (1 + t) e^{-theta t}.
  std::function<double(double)> shape;
  std::string description;

  double operator()(double t) const { return constant * shape(t); }
};

/// Case table for S' + C S = Gamma, S(0) = E0: C > theta gives
/// c (1+E0) e^{-theta t}, C = theta gives c (1+E0) (1+t) e^{-theta t},
/// C < theta gives c (1+E0) e^{-C t}; polynomial Gamma gives c (1+t-T)^{-theta}.
RateEnvelope linear_rate_table(double C, const GammaForm& gamma, double T, double E0,
                               double horizon);

}  // namespace wavedecay

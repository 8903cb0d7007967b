#include "wavedecay/decay_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DissipationMap::DissipationMap(Kind kind, double C, double gamma, std::string label)
    : kind_(kind), C_(C), gamma_(gamma), label_(std::move(label)) {}

DissipationMap DissipationMap::linear(double C) {
  if (!(C > 0.0)) throw InvalidArgument("linear dissipation coefficient must be positive");
  return DissipationMap(Kind::linear, C, 1.0, "linear");
}

DissipationMap DissipationMap::power(double C, double gamma) {
  if (!(C > 0.0)) throw InvalidArgument("power dissipation coefficient must be positive");
  if (!(gamma >= 1.0)) throw InvalidArgument("power dissipation exponent must be >= 1");
  return DissipationMap(Kind::power, C, gamma, "power");
}

DissipationMap DissipationMap::superlinear(double C) {
  if (!(C > 0.0)) throw InvalidArgument("dissipation coefficient must be positive");
  return DissipationMap(Kind::superlinear, C, 1.5, "superlinear");
}

DissipationMap DissipationMap::linear_pipeline(double T, double C_T) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (!(C_T >= 1.0)) throw InvalidArgument("C_T must be at least 1");
  DissipationMap p(Kind::linear, 1.0 / (T * C_T), 1.0, "linear-pipeline");
  p.T_ = T;
  return p;
}

DissipationMap DissipationMap::nonlinear_pipeline(double T, double K, const HFunction& h) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (!(K > 0.0)) throw InvalidArgument("K must be positive");
  DissipationMap p(Kind::calibrated, 1.0, 1.0, "nonlinear-pipeline");
  p.T_ = T;
  p.K_ = K;
  p.h_ = std::make_shared<const HFunction>(h);
  return p;
}

DissipationMap DissipationMap::custom(std::function<double(double)> fn, std::string label) {
  DissipationMap p(Kind::custom, 1.0, 1.0, std::move(label));
  p.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
  return p;
}

double DissipationMap::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::linear:
      return C_ * s;
    case Kind::power:
      return C_ * std::pow(s, gamma_);
    case Kind::superlinear:
      return C_ * std::pow(s, 1.5) * std::exp(-1.0 / s);
    case Kind::calibrated:
      return h_->inverse(s / K_) / (4.0 * T_);
    case Kind::custom:
      return (*fn_)(s);
  }
  return 0.0;
}

double DissipationMap::inverse(double y) const {
  if (y <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::linear:
      return y / C_;
    case Kind::power:
      return std::pow(y / C_, 1.0 / gamma_);
    case Kind::calibrated:
      return K_ * (*h_)(4.0 * T_ * y);
    case Kind::superlinear:
    case Kind::custom:
      break;
  }
  double hi = 1.0;
  while ((*this)(hi) < y) {
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  double lo = hi;
  while ((*this)(lo) >= y) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  return numerics::bisect_increasing([this](double s) { return (*this)(s); }, y, lo, hi);
}

SampledCurve::SampledCurve(std::vector<double> t, std::vector<double> y,
                           std::vector<double> dy)
    : t_(std::move(t)), y_(std::move(y)), dy_(std::move(dy)) {
  if (t_.empty() || t_.size() != y_.size() || t_.size() != dy_.size()) {
    throw InvalidArgument("curve needs matching, nonempty knot arrays");
  }
}

double SampledCurve::operator()(double t) const {
  if (t_.empty()) throw InvalidArgument("empty curve");
  if (t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  const auto j = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  const double h = t_[j] - t_[j - 1];
  const double s = (t - t_[j - 1]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[j - 1] + (s3 - 2 * s2 + s) * h * dy_[j - 1] +
         (-2 * s3 + 3 * s2) * y_[j] + (s3 - s2) * h * dy_[j];
}

OdeSolution solve_ode_at(const OdeProblem& problem, const std::vector<double>& times,
                         double rel_tol) {
  if (!(problem.S0 >= 0.0) || !std::isfinite(problem.S0)) {
    throw InvalidArgument("S(0) must be nonnegative");
  }
  if (times.empty()) throw InvalidArgument("no output times");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      throw InvalidArgument("output times must be nonnegative and increasing");
    }
  }
  const auto& p = problem.p;
  const auto& gamma = problem.gamma;
  auto rhs = [&](double t, double S) { return gamma(t) - p(std::max(S, 0.0)); };
  auto rk4 = [&](double t, double S, double h) {
    const double k1 = rhs(t, S);
    const double k2 = rhs(t + 0.5 * h, S + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, S + 0.5 * h * k2);
    const double k4 = rhs(t + h, S + h * k3);
    return S + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  OdeSolution sol;
  std::vector<double> kt{0.0}, ky{problem.S0}, kd{rhs(0.0, problem.S0)};
  double t = 0.0;
  double S = problem.S0;
  double h_free = std::min(1e-2, times.back() > 0.0 ? times.back() : 1e-2);
  constexpr std::size_t kMaxSteps = 100'000'000;

  for (double target : times) {
    while (t < target) {
      const double room = target - t;
      const bool limited = h_free >= room;
      const double h = limited ? room : h_free;
      const double full = rk4(t, S, h);
      const double mid = rk4(t, S, 0.5 * h);
      const double half = rk4(t + 0.5 * h, mid, 0.5 * h);
      const double err = std::abs(half - full) / 15.0;
      const double tol = rel_tol * std::max(std::abs(half), std::abs(S)) + 1e-300;
      const bool tiny = h <= 1e-13 * std::max(1.0, t);
      if (!std::isfinite(half)) {
        throw NumericalError("comparison ODE produced a non-finite value at t = " +
                             std::to_string(t));
      }
      if ((err <= tol && half >= 0.0) || tiny) {
        double next = half + (half - full) / 15.0;
        if (next < 0.0) next = std::max(half, 0.0);
        t = limited ? target : t + h;
        S = next;
        kt.push_back(t);
        ky.push_back(S);
        kd.push_back(rhs(t, S));
        ++sol.accepted_steps;
        if (!limited) {
          const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
          h_free = h * std::clamp(grow, 0.2, 4.0);
        }
      } else {
        ++sol.rejected_steps;
        const double shrink = half < 0.0 ? 0.5 : std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 0.9);
        h_free = h * shrink;
      }
      if (sol.accepted_steps + sol.rejected_steps > kMaxSteps) {
        throw NumericalError("comparison ODE exceeded the step budget");
      }
    }
    sol.t.push_back(target);
    sol.S.push_back(target == 0.0 ? problem.S0 : S);
    sol.gamma.push_back(gamma(target));
  }
  sol.dense = SampledCurve(std::move(kt), std::move(ky), std::move(kd));
  return sol;
}

OdeSolution solve_ode(const OdeProblem& problem, double horizon, double dt,
                      double rel_tol) {
  if (!(dt > 0.0)) throw InvalidArgument("ODE output step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("ODE horizon must be nonnegative");
  }
  const double count = std::floor(horizon / dt + 1e-9);
  if (count > 1e7) throw InvalidArgument("too many ODE output points; enlarge dt");
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(count);
  times.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) times.push_back(dt * static_cast<double>(k));
  if (horizon - times.back() > 1e-9 * std::max(1.0, horizon)) {
    times.push_back(horizon);
  } else {
    times.back() = std::max(times.back(), horizon);
    if (n == 0) times.back() = 0.0;
  }
  return solve_ode_at(problem, times, rel_tol);
}

BoundCurve envelope(const SampledCurve& S, const GammaProfile& gamma, double T,
                    double horizon, const std::vector<double>& times, double factor) {
  if (!(T > 0.0)) throw InvalidArgument("T must be positive");
  if (horizon < T) throw InvalidArgument("horizon must exceed T");
  if (!(factor >= 0.0)) throw InvalidArgument("envelope factor must be nonnegative");
  const double lead = 4.0 * std::exp(T);
  const double slack = 1e-9 * std::max(1.0, horizon);
  BoundCurve b;
  for (double t : times) {
    if (t < T - slack || t > horizon + slack) continue;
    const double s = std::max(t - T, 0.0);
    if (s > S.t_max() + slack) {
      throw InvalidArgument("S is not available up to horizon - T");
    }
    const double delta = factor > 0.0 ? window_integral(gamma, s, T) : 0.0;
    b.t.push_back(t);
    b.B.push_back(lead * (S(s) + factor * delta));
  }
  return b;
}

std::vector<double> discrete_iteration(double W0, const std::function<double(double)>& l,
                                       const std::vector<double>& delta,
                                       std::size_t steps) {
  if (!(W0 >= 0.0)) throw InvalidArgument("W0 must be nonnegative");
  if (delta.size() < steps) throw InvalidArgument("need one window integral per step");
  if (std::abs(l(0.0)) > 1e-14) throw InvalidArgument("l(0) must vanish");
  double range = W0;
  for (std::size_t m = 0; m < steps; ++m) {
    if (delta[m] < 0.0) throw InvalidArgument("window integrals must be nonnegative");
    range += delta[m];
  }
  if (range > 0.0) {
    constexpr int kChecks = 1000;
    double prev_l = l(0.0);
    double prev_r = 0.0 - prev_l;
    for (int k = 1; k <= kChecks; ++k) {
      const double x = range * k / kChecks;
      const double lx = l(x);
      const double rx = x - lx;
      const double slack = 1e-12 * std::max(1.0, std::abs(x));
      if (lx < prev_l - slack) {
        throw InvalidArgument("l is not increasing on the iteration range");
      }
      if (rx < prev_r - slack) {
        throw InvalidArgument("I - l is not increasing on the iteration range");
      }
      prev_l = lx;
      prev_r = rx;
    }
  }
  std::vector<double> W{W0};
  W.reserve(steps + 1);
  for (std::size_t m = 0; m < steps; ++m) {
    const double x = W.back() + delta[m];
    W.push_back(x - l(x));
  }
  return W;
}

DominanceResult dominance_check(const std::vector<double>& t, const std::vector<double>& S,
                                const std::vector<double>& y) {
  if (t.size() != S.size() || t.size() != y.size()) {
    throw InvalidArgument("dominance check needs a common sample grid");
  }
  double smax = 0.0;
  for (double s : S) smax = std::max(smax, s);
  DominanceResult r;
  r.tolerance = 1e-8 * (1.0 + smax);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double v = S[k] - y[k];
    if (v > r.max_violation || (std::isnan(y[k]) && r.pass)) {
      r.max_violation = std::isnan(y[k]) ? kInf : v;
      r.location = t[k];
    }
    if (!(y[k] >= S[k] - r.tolerance)) r.pass = false;
  }
  return r;
}

InversePsi::InversePsi(DissipationMap p, double X, double tau_max)
    : p_(std::move(p)), X_(X) {
  if (!(X > 0.0) || !std::isfinite(X)) throw InvalidArgument("psi needs a positive upper limit");
  const double ratio = std::pow(10.0, -1.0 / 64.0);
  x_.push_back(X);
  psi_.push_back(0.0);
  while (psi_.back() < tau_max) {
    const double lo = x_.back() * ratio;
    if (lo < 1e-300 || !(p_(lo) > 0.0)) {
      exhausted_ = true;
      break;
    }
    const double seg = local_integral(lo, x_.back());
    if (!std::isfinite(seg)) {
      exhausted_ = true;
      break;
    }
    x_.push_back(lo);
    psi_.push_back(psi_.back() + seg);
  }
}

double InversePsi::local_integral(double x, double x_hi) const {
  if (x >= x_hi) return 0.0;
  return numerics::integrate(
      [this](double u) {
        const double s = std::exp(u);
        return s / p_(s);
      },
      std::log(x), std::log(x_hi), 1e-12);
}

double InversePsi::psi(double x) const {
  if (!(x > 0.0)) return kInf;
  if (x >= X_) return -local_integral(X_, x);
  if (x < x_.back()) return psi_.back() + local_integral(x, x_.back());
  // x_ is decreasing; find the panel [x_[j], x_[j-1]] containing x.
  const auto it = std::lower_bound(x_.begin(), x_.end(), x, std::greater<double>());
  const auto j = static_cast<std::size_t>(it - x_.begin());
  if (j == 0) return 0.0;
  return psi_[j - 1] + local_integral(x, x_[j - 1]);
}

double InversePsi::inverse(double tau) const {
  if (tau <= 0.0) return X_;
  if (tau > psi_.back()) {
    if (exhausted_) return 0.0;
    // Past the tabulated range: keep integrating panel by panel.
    const double ratio = std::pow(10.0, -1.0 / 64.0);
    double x = x_.back();
    double acc = psi_.back();
    for (;;) {
      const double lo = x * ratio;
      if (lo < 1e-300 || !(p_(lo) > 0.0)) return 0.0;
      const double seg = local_integral(lo, x);
      if (acc + seg >= tau) return refine(tau, acc, x, lo);
      acc += seg;
      x = lo;
    }
  }
  const auto it = std::upper_bound(psi_.begin(), psi_.end(), tau);
  const auto j = static_cast<std::size_t>(it - psi_.begin());
  return refine(tau, psi_[j - 1], x_[j - 1], x_[j]);
}

double InversePsi::refine(double tau, double psi_a, double xa, double xb) const {
  const double psi_b = psi_a + local_integral(xb, xa);
  const double w = psi_b > psi_a ? (tau - psi_a) / (psi_b - psi_a) : 0.0;
  double x = std::exp(std::log(xa) + w * (std::log(xb) - std::log(xa)));
  for (int iter = 0; iter < 60; ++iter) {
    // psi(x) - tau is decreasing in x with derivative -1/p(x).
    const double f = psi_a + local_integral(x, xa) - tau;
    const double next = std::clamp(x + f * p_(x), xb, xa);
    if (std::abs(next - x) <= 1e-15 * x) return next;
    x = next;
  }
  return x;
}

std::string to_string(DecayCase c) {
  switch (c) {
    case DecayCase::unforced:
      return "unforced";
    case DecayCase::forced_subdominant:
      return "forced-subdominant";
    case DecayCase::forced_dominant:
      return "forced-dominant";
    case DecayCase::unclassified:
      return "unclassified";
  }
  return "unknown";
}

double homogeneity_constant(const DissipationMap& p, double range) {
  if (!(range > 0.0)) throw InvalidArgument("range must be positive");
  double m = kInf;
  const auto Ks = numerics::logspace(0.0, 6.0, 61);
  const auto xs = numerics::logspace(std::log10(range) - 12.0, std::log10(range), 97);
  for (double K : Ks) {
    const double pk = p(K);
    if (!(pk > 0.0) || !std::isfinite(pk)) continue;
    for (double x : xs) {
      const double px = p(x);
      const double pkx = p(K * x);
      if (!(px > 0.0) || !(pkx > 0.0) || !std::isfinite(pkx)) continue;
      const double denom = pk * px;
      if (!(denom > 0.0) || !std::isfinite(denom)) continue;
      m = std::min(m, pkx / denom);
    }
  }
  return std::isinf(m) ? 0.0 : m;
}

namespace {

PredictedForm read_form(const std::function<double(double)>& bound, double t0, double t1) {
  PredictedForm form;
  if (!(t1 > t0)) return form;
  std::vector<double> ts, ys;
  for (double t : numerics::linspace(t0, t1, 200)) {
    const double y = bound(t);
    if (y > 0.0 && std::isfinite(y)) {
      ts.push_back(t);
      ys.push_back(y);
    }
  }
  if (ts.size() < kMinFitSamples) return form;
  const DecayFit fit = fit_best(ts, ys, t0, t1);
  form.valid = true;
  form.model = fit.model;
  form.parameter = fit.parameter;
  return form;
}

std::vector<double> classification_grid(double horizon) {
  auto grid = numerics::linspace(0.0, std::min(horizon, 10.0), 401);
  if (horizon > 10.0) {
    for (double t : numerics::logspace(1.0, std::log10(horizon), 401)) {
      if (t > grid.back()) grid.push_back(t);
    }
  }
  return grid;
}

}  // namespace

DecayClassification classify(const DissipationMap& p, const GammaProfile& gamma,
                             double S0, const ClassifyOptions& options) {
  if (!(S0 >= 0.0)) throw InvalidArgument("S(0) must be nonnegative");
  if (!(options.horizon > 0.0)) throw InvalidArgument("classification horizon must be positive");
  const double H = options.horizon;
  const double t0 = options.fit_t0 >= 0.0 ? options.fit_t0 : 0.5 * H;
  const double t1 = options.fit_t1 > 0.0 ? options.fit_t1 : H;

  DecayClassification out;
  auto& adm = out.admissibility;

  if (gamma.identically_zero()) {
    out.tag = DecayCase::unforced;
    adm.differential_ok = adm.kappa_ok = adm.initial_ok = true;
    adm.kappa = 1.0;
    if (S0 == 0.0) {
      out.bound = [](double) { return 0.0; };
      adm.diagnostics = "S(0) = 0: S vanishes identically";
      return out;
    }
    auto psi = std::make_shared<const InversePsi>(p, S0, 2.0 * H + 1.0);
    out.bound = [psi](double t) { return psi->inverse(t); };
    out.prediction = read_form(out.bound, t0, t1);
    return out;
  }

  const auto grid = classification_grid(H);
  std::vector<double> P(grid.size()), ratio(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double g = gamma(grid[k]);
    if (!(g > 0.0) || !std::isfinite(g)) {
      adm.diagnostics = "Gamma is not strictly positive on the sample grid (t = " +
                        std::to_string(grid[k]) + "); mixed profiles are not classified";
      return out;
    }
    P[k] = p.inverse(g);
  }
  auto Pof = [&](double t) { return p.inverse(gamma(t)); };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double h = 1e-5 * (1.0 + t);
    double dP;
    if (t < h) {
      dP = (-3.0 * P[k] + 4.0 * Pof(t + h) - Pof(t + 2.0 * h)) / (2.0 * h);
    } else {
      dP = (Pof(t + h) - Pof(t - h)) / (2.0 * h);
    }
    ratio[k] = -dP / gamma(t);
  }
  adm.ratio_min = *std::min_element(ratio.begin(), ratio.end());
  adm.ratio_max = *std::max_element(ratio.begin(), ratio.end());
  const double P0 = P.front();
  adm.m = homogeneity_constant(p, std::max({S0, P0, 1.0}));
  const double kappa0 = std::max(1.0, P0 > 0.0 ? S0 / P0 : kInf);

  auto kappa_for = [&](double c) -> double {
    if (!(adm.m > 0.0) || !std::isfinite(kappa0)) return kInf;
    auto f = [&](double k) { return adm.m * p(k) - k * c - 1.0; };
    if (f(kappa0) >= 0.0) return kappa0;
    double hi = kappa0;
    while (f(hi) < 0.0) {
      hi *= 2.0;
      if (hi > 1e6) return kInf;
    }
    double lo = std::max(kappa0, 0.5 * hi);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) >= 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  };

  // Case 2(b): d/dt p^{-1}(Gamma) + c Gamma >= 0 for c >= max ratio.
  {
    const double c = adm.ratio_max > 0.0 ? adm.ratio_max * (1.0 + 1e-3) : 1e-4;
    const double kappa = kappa_for(c);
    if (std::isfinite(kappa)) {
      out.tag = DecayCase::forced_dominant;
      adm.c = c;
      adm.kappa = kappa;
      adm.differential_ok = adm.kappa_ok = adm.initial_ok = true;
      adm.diagnostics = "reversed differential condition holds with c >= max ratio";
      out.bound = [p, gamma, kappa](double t) { return kappa * p.inverse(gamma(t)); };
      out.prediction = read_form(out.bound, t0, t1);
      return out;
    }
  }

  // Case 2(a): d/dt p^{-1}(Gamma) + c Gamma < 0 needs c < min ratio.
  if (adm.ratio_min > 0.0) {
    const double c_max = adm.ratio_min * (1.0 - 1e-3);
    double c = 0.0;
    double kappa = kInf;
    if (std::isfinite(kappa_for(c_max))) {
      c = c_max;
    } else {
      double feasible = 0.0;
      for (double cg : numerics::logspace(-4.0, 2.0, 25)) {
        if (cg < c_max && std::isfinite(kappa_for(cg))) feasible = cg;
      }
      if (feasible > 0.0) {
        double lo = feasible;
        double hi = c_max;
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (std::isfinite(kappa_for(mid))) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        c = lo;
      }
    }
    if (c > 0.0) kappa = kappa_for(c);
    if (c > 0.0 && std::isfinite(kappa)) {
      out.tag = DecayCase::forced_subdominant;
      adm.c = c;
      adm.kappa = kappa;
      adm.differential_ok = adm.kappa_ok = adm.initial_ok = true;
      adm.diagnostics = "differential condition holds with c < min ratio";
      auto psi = std::make_shared<const InversePsi>(p, P0, 2.0 * c * H + 1.0);
      out.bound = [psi, kappa, c](double t) { return kappa * psi->inverse(c * t); };
      out.prediction = read_form(out.bound, t0, t1);
      return out;
    }
    adm.differential_ok = true;
    adm.diagnostics = "no c in (0, " + std::to_string(c_max) +
                      ") admits kappa <= 1e6 with m p(kappa) - kappa c - 1 >= 0";
  } else {
    adm.diagnostics = "neither case applies: reversed condition needs kappa > 1e6 and "
                      "min ratio is not positive";
  }
  adm.kappa_ok = false;
  return out;
}

namespace {

/// Largest value of `ratio` on the sample grid, polished by golden-section
/// search between the neighbours of the best sample.
double sampled_max(const std::function<double(double)>& ratio, const std::vector<double>& grid) {
  std::size_t best = 0;
  double value = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = ratio(grid[k]);
    if (r > value) {
      value = r;
      best = k;
    }
  }
  if (value <= 0.0) return 0.0;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) value = std::max(value, numerics::golden_maximize(ratio, lo, hi).value);
  return value;
}

}  // namespace

RateEnvelope linear_rate_table(double C, const GammaForm& gamma, double T, double E0,
                               double horizon) {
  if (!(C > 0.0)) throw InvalidArgument("C must be positive");
  if (!(gamma.theta > 0.0)) throw InvalidArgument("theta must be positive");
  if (!(gamma.M >= 0.0)) throw InvalidArgument("M must be nonnegative");
  if (!(E0 >= 0.0)) throw InvalidArgument("E0 must be nonnegative");
  if (!(horizon > T) || !(T > 0.0)) throw InvalidArgument("horizon must exceed T");
  const double M = gamma.M;
  const double th = gamma.theta;
  RateEnvelope env;

  if (gamma.kind == GammaForm::Kind::exponential) {
    const bool equal = std::abs(C - th) <= 1e-12 * std::max(C, th);
    auto exact = [=](double t) {
      if (equal) return (E0 + M * t) * std::exp(-C * t);
      return E0 * std::exp(-C * t) + M * (std::exp(-th * t) - std::exp(-C * t)) / (C - th);
    };
    env.model = DecayModel::exponential;
    if (equal) {
      env.parameter = th;
      env.shape = [th](double t) { return (1.0 + t) * std::exp(-th * t); };
      env.description = "c(1+E0)(1+t)exp(-theta t)";
    } else if (C > th) {
      env.parameter = th;
      env.shape = [th](double t) { return std::exp(-th * t); };
      env.description = "c(1+E0)exp(-theta t)";
    } else {
      env.parameter = C;
      env.shape = [C](double t) { return std::exp(-C * t); };
      env.description = "c(1+E0)exp(-C t)";
    }
    // Compare in logs so long horizons do not underflow.
    const auto shape = env.shape;
    env.constant = sampled_max(
        [&](double t) {
          const double s = exact(t);
          return s > 0.0 ? std::exp(std::log(s) - std::log(shape(t))) : 0.0;
        },
        numerics::linspace(0.0, horizon, 2001));
    return env;
  }

  if (!(th > 1.0)) {
    throw InvalidArgument("polynomial Gamma needs theta > 1 for an integrable force");
  }
  env.model = DecayModel::polynomial;
  env.parameter = th;
  env.shape = [T, th](double t) { return std::pow(1.0 + t - T, -th); };
  env.description = "c(1+t-T)^(-theta)";
  auto grid = numerics::linspace(T, std::min(horizon, T + 10.0), 201);
  if (horizon > T + 10.0) {
    for (double t : numerics::logspace(std::log10(T + 10.0), std::log10(horizon), 200)) {
      grid.push_back(t);
    }
  }
  const auto shape = env.shape;
  env.constant = sampled_max(
      [&](double t) {
        const double forced = numerics::integrate(
            [=](double s) { return std::exp(-C * (t - s)) * M * std::pow(1.0 + s, -th); },
            0.0, t, 1e-10);
        return (E0 * std::exp(-C * t) + forced) / shape(t);
      },
      grid);
  return env;
}

}  // namespace wavedecay

#include "wavedecay/fit.hpp"

#include <cmath>
#include <limits>

#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay {
namespace {

struct Line {
  double a = 0.0;
  double b = 0.0;
  double rms = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit window has no spread in time");
  Line l;
  l.b = sxy / sxx;
  l.a = my - l.b * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.a + l.b * x[i]);
    ss += r * r;
  }
  l.rms = std::sqrt(ss / n);
  return l;
}

double log_rms(const DecayFit& fit, const std::vector<double>& t,
               const std::vector<double>& E) {
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = fit.evaluate(t[i]);
    const double r = v > 0.0 ? std::log(E[i]) - std::log(v)
                             : std::numeric_limits<double>::infinity();
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(t.size()));
}

DecayFit fit_inverse_log(const std::vector<double>& t, const std::vector<double>& E) {
  std::vector<double> inv(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) inv[i] = 1.0 / E[i];
  std::vector<double> x(t.size());
  auto line_for = [&](double d) {
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = std::log(t[i] + d);
    return least_squares(x, inv);
  };
  if (t.front() < 0.0) throw InvalidArgument("inverse-log fit needs t >= 0");
  const double top = std::log10(std::max(100.0 * t.back(), 1.0));
  double best_d = 0.0;
  double best = t.front() > 0.0 ? line_for(0.0).rms : std::numeric_limits<double>::infinity();
  for (double d : numerics::logspace(-4.0, top, 121)) {
    const double r = line_for(d).rms;
    if (r < best) {
      best = r;
      best_d = d;
    }
  }
  if (best_d > 0.0) {
    const double lo = std::log(best_d) - std::log(10.0) * (top + 4.0) / 120.0;
    const double hi = std::log(best_d) + std::log(10.0) * (top + 4.0) / 120.0;
    const auto m = numerics::golden_maximize(
        [&](double ld) { return -line_for(std::exp(ld)).rms; }, lo, hi, 1e-10);
    if (-m.value < best) best_d = std::exp(m.arg);
  }
  const Line l = line_for(best_d);
  DecayFit f;
  f.model = DecayModel::inverse_log;
  f.parameter = l.b;
  f.intercept = l.a;
  f.shift = best_d;
  f.residual = l.rms;
  return f;
}

}  // namespace

std::string to_string(DecayModel m) {
  switch (m) {
    case DecayModel::exponential:
      return "exponential";
    case DecayModel::polynomial:
      return "polynomial";
    case DecayModel::inverse_log:
      return "inverse_log";
  }
  return "unknown";
}

DecayModel decay_model_from_string(const std::string& s) {
  if (s == "exponential") return DecayModel::exponential;
  if (s == "polynomial") return DecayModel::polynomial;
  if (s == "inverse_log" || s == "inverse-log") return DecayModel::inverse_log;
  throw InvalidArgument("unknown decay model '" + s + "'");
}

double DecayFit::evaluate(double t) const {
  switch (model) {
    case DecayModel::exponential:
      return std::exp(intercept - parameter * t);
    case DecayModel::polynomial:
      return std::exp(intercept - parameter * std::log1p(t));
    case DecayModel::inverse_log:
      return 1.0 / (intercept + parameter * std::log(t + shift));
  }
  return 0.0;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E,
                   double t0, double t1, DecayModel model) {
  if (t.size() != E.size()) throw InvalidArgument("time and energy lengths differ");
  std::vector<double> ts, es;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(E[i] > 0.0)) {
      throw InvalidArgument("nonpositive energy at t = " + std::to_string(t[i]) +
                            " inside the fit window");
    }
    ts.push_back(t[i]);
    es.push_back(E[i]);
  }
  if (ts.size() < kMinFitSamples) {
    throw InvalidArgument("fit window holds " + std::to_string(ts.size()) +
                          " samples, need at least " + std::to_string(kMinFitSamples));
  }
  DecayFit f;
  if (model == DecayModel::inverse_log) {
    f = fit_inverse_log(ts, es);
  } else {
    std::vector<double> x(ts.size()), y(es.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      x[i] = model == DecayModel::exponential ? ts[i] : std::log1p(ts[i]);
      y[i] = std::log(es[i]);
    }
    const Line l = least_squares(x, y);
    f.model = model;
    f.parameter = -l.b;
    f.intercept = l.a;
    f.residual = l.rms;
  }
  f.samples = ts.size();
  f.log_residual = log_rms(f, ts, es);
  return f;
}

DecayFit fit_decay(const EnergyTrace& trace, double t0, double t1, DecayModel model) {
  return fit_decay(trace.t, trace.E, t0, t1, model);
}

DecayFit fit_best(const std::vector<double>& t, const std::vector<double>& E,
                  double t0, double t1) {
  DecayFit best = fit_decay(t, E, t0, t1, DecayModel::exponential);
  for (DecayModel m : {DecayModel::polynomial, DecayModel::inverse_log}) {
    const DecayFit f = fit_decay(t, E, t0, t1, m);
    if (f.log_residual < best.log_residual) best = f;
  }
  return best;
}

}  // namespace wavedecay

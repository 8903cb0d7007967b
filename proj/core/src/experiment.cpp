#include "wavedecay/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxIterationSteps = 2000;
constexpr std::size_t kOdeIntervals = 4000;
constexpr double kBandLow = 0.2;
constexpr double kBandHigh = 5.0;

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir.empty() ? "." : dir);
  std::filesystem::create_directories(p);
  return p;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

/// Integral of Gamma over [0, b], split at powers of ten so slowly decaying
/// tails on long horizons stay accurate.
double gamma_integral(const GammaProfile& gamma, double b) {
  if (gamma.identically_zero() || b <= 0.0) return 0.0;
  double total = 0.0;
  double lo = 0.0;
  double hi = std::min(1.0, b);
  while (lo < b) {
    total += numerics::integrate([&](double s) { return gamma(s); }, lo, hi, 1e-9);
    lo = hi;
    hi = std::min(10.0 * hi, b);
  }
  return total;
}

std::vector<double> subset(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto k : idx) out.push_back(x[k]);
  return out;
}

FitWindow late_window(double horizon, double T) {
  return {std::max(0.5 * horizon, 2.0 * T), horizon};
}

/// Is x * ln t within [0.2, 5] times its median over the window?
bool inverse_log_band(const std::vector<double>& t, const std::vector<double>& x,
                      const FitWindow& w) {
  std::vector<double> scaled;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= w.t0 && t[k] <= w.t1 && t[k] > 1.0) scaled.push_back(x[k] * std::log(t[k]));
  }
  if (scaled.size() < kMinFitSamples) return false;
  std::vector<double> sorted = scaled;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (!(median > 0.0)) return false;
  return std::all_of(scaled.begin(), scaled.end(), [&](double y) {
    return y >= kBandLow * median && y <= kBandHigh * median;
  });
}

}  // namespace

json to_json(const DecayFit& fit) {
  return {{"model", to_string(fit.model)},       {"parameter", number_or_null(fit.parameter)},
          {"intercept", number_or_null(fit.intercept)}, {"shift", fit.shift},
          {"residual", number_or_null(fit.residual)},
          {"log_residual", number_or_null(fit.log_residual)},
          {"samples", fit.samples}};
}

json to_json(const DominanceResult& d) {
  return {{"pass", d.pass},
          {"max_violation", d.max_violation},
          {"location", d.location},
          {"tolerance", d.tolerance}};
}

json to_json(const ObservabilityReport& r) {
  json ratios = json::array();
  for (const auto& row : r.ratios) {
    json jr = json::array();
    for (double x : row) jr.push_back(number_or_null(x));
    ratios.push_back(jr);
  }
  json j = {{"kind", r.kind},
            {"runs", r.runs},
            {"modes", r.modes},
            {"forced", r.forced},
            {"seed", r.seed},
            {"T", r.T},
            {"safety_factor", r.safety_factor},
            {"windows_used", r.windows_used},
            {"windows_skipped", r.windows_skipped},
            {"window_starts", r.window_starts},
            {"ratios", ratios},
            {"max_ratio", r.max_ratio},
            {"constant", r.constant},
            {"C_hat_T", r.C_hat_T},
            {"C_T", r.C_T},
            {"C_tilde_T", r.C_tilde_T},
            {"C1T", r.C1T}};
  if (r.linear_max_ratio) j["linear_max_ratio"] = *r.linear_max_ratio;
  return j;
}

json CalibratedConstants::to_json() const {
  json j = {{"T", T},
            {"control_time", {{"t_min", control.t_min}, {"method", to_string(control.method)}}},
            {"C_T", C_T},
            {"C_T_source", C_T_source},
            {"C1T", C1T},
            {"C1T_source", C1T_source},
            {"E0", E0},
            {"damper_mass", damper_mass}};
  if (K > 0.0) {
    j["K"] = K;
    j["K_source"] = K_source;
  }
  if (report) j["observability"] = wavedecay::to_json(*report);
  return j;
}

json VerificationVerdict::to_json() const {
  json j;
  j["case"] = to_string(tag);
  j["dominance"] = wavedecay::to_json(dominance);
  auto fit_entry = [](const std::optional<DecayFit>& f, const FitWindow& w) {
    json e = f ? wavedecay::to_json(*f) : json(nullptr);
    if (f) e["window"] = {w.t0, w.t1};
    return e;
  };
  j["measured_fit"] = fit_entry(measured_fit, measured_window);
  j["measured_predicted_fit"] = fit_entry(measured_predicted_fit, measured_window);
  j["envelope_fit"] = fit_entry(envelope_fit, envelope_window);
  if (!fit_note.empty()) j["fit_note"] = fit_note;
  j["predicted"] = {{"valid", predicted.valid},
                    {"model", to_string(predicted.model)},
                    {"parameter", number_or_null(predicted.parameter)},
                    {"source", prediction_source}};
  j["agreement"] = agreement;
  j["tolerance"] = tolerance;
  return j;
}

json ClassificationReport::to_json() const {
  const auto& a = classification.admissibility;
  json j;
  j["case"] = to_string(classification.tag);
  j["admissibility"] = {{"c", a.c},
                        {"kappa", a.kappa},
                        {"m", a.m},
                        {"ratio_min", number_or_null(a.ratio_min)},
                        {"ratio_max", number_or_null(a.ratio_max)},
                        {"differential_ok", a.differential_ok},
                        {"kappa_ok", a.kappa_ok},
                        {"initial_ok", a.initial_ok},
                        {"diagnostics", a.diagnostics}};
  const auto& p = classification.prediction;
  j["prediction"] = {{"valid", p.valid},
                     {"model", to_string(p.model)},
                     {"parameter", number_or_null(p.parameter)}};
  j["bound_check"] = bound_check ? wavedecay::to_json(*bound_check) : json(nullptr);
  json it = iteration_check ? wavedecay::to_json(*iteration_check) : json::object();
  it["steps"] = iteration_steps;
  if (!iteration_error.empty()) {
    it["pass"] = false;
    it["error"] = iteration_error;
  }
  j["discrete_iteration"] = it;
  return j;
}

Pipeline::Pipeline(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      seed_(seed),
      grid_(Grid::interval(1.0, Grid::kMinCells)),
      law_(DampingLaw::linear()) {
  scenario_.validate();
  grid_ = scenario_.build_grid();
  damper_ = scenario_.build_damper(grid_);
  law_ = scenario_.build_law();
  force_ = scenario_.build_forcing(grid_);
}

bool Pipeline::nonlinear() const { return law_.kind() != DampingLaw::Kind::linear; }

double Pipeline::ode_horizon() const { return scenario_.ode_horizon(); }

const EnergyTrace& Pipeline::simulate() {
  if (!trace_) {
    trace_ = staged("simulate", [&] {
      RunOptions opts;
      opts.dt = scenario_.dt(grid_);
      opts.horizon = scenario_.numerics.horizon;
      opts.sample_stride = scenario_.numerics.sample_stride;
      return run(grid_, damper_, law_, force_, scenario_.build_initial(grid_), opts);
    });
  }
  return *trace_;
}

EnsembleConfig Pipeline::ensemble_config() const {
  EnsembleConfig c;
  c.grid = scenario_.build_ensemble_grid();
  c.damper = scenario_.build_damper(c.grid);
  c.law = law_;
  c.forcing = scenario_.build_forcing(c.grid);
  c.random_forcing = scenario_.ensemble.random_forcing;
  c.T = scenario_.working_T();
  c.horizon = scenario_.ensemble.horizon.value_or(
      std::min(scenario_.numerics.horizon, 10.0 * c.T));
  c.runs = scenario_.ensemble.runs;
  c.modes = scenario_.ensemble.modes;
  c.safety_factor = scenario_.constants.safety_factor;
  c.seed = seed_;
  c.workers = scenario_.ensemble.workers;
  return c;
}

HFunction Pipeline::h_function() {
  const auto& c = calibrate();
  return HFunction(law_, c.damper_mass);
}

ObservabilityReport Pipeline::observability() {
  return staged("calibrate", [&] {
    const auto config = ensemble_config();
    if (!nonlinear()) return estimate_linear_constant(config);
    const HFunction h(law_, damper_.mass(config.T));
    return estimate_nonlinear_constant(config, law_, h);
  });
}

const CalibratedConstants& Pipeline::calibrate() {
  if (constants_) return *constants_;
  CalibratedConstants c = staged("calibrate", [&] {
    const auto& over = scenario_.constants;
    CalibratedConstants c;
    c.T = scenario_.working_T();
    c.control = scenario_.control_time();
    c.E0 = energy(scenario_.build_initial(grid_), grid_);
    c.damper_mass = damper_.mass(c.T);
    const bool need_C1T = !nonlinear() && !force_.identically_zero();
    if (!over.C_T || (need_C1T && !over.C1T)) c.report = observability();
    c.C_T = over.C_T ? *over.C_T : c.report->C_T;
    c.C_T_source = over.C_T ? "config" : "ensemble";
    if (over.C1T) {
      c.C1T = *over.C1T;
      c.C1T_source = "config";
    } else if (c.report) {
      c.C1T = c.report->C1T;
      c.C1T_source = "ensemble";
    } else {
      c.C1T = 1.0;
      c.C1T_source = "unused";
    }
    return c;
  });

  gamma_ = staged("forcing", [&] {
    if (force_.identically_zero()) return GammaProfile::zero();
    if (!nonlinear()) return gamma_linear(force_, c.C1T);
    const ConjugatePair pair(c.T, c.C_T, HFunction(law_, c.damper_mass));
    return gamma_nonlinear(force_, pair);
  });

  if (nonlinear()) {
    staged("forcing", [&] {
      if (scenario_.constants.K) {
        c.K = *scenario_.constants.K;
        c.K_source = "config";
      } else {
        c.K = 4.0 * std::max(c.C_T, c.E0 + gamma_integral(*gamma_, ode_horizon()));
        c.K_source = "default";
      }
    });
  }
  constants_ = std::move(c);
  return *constants_;
}

const GammaProfile& Pipeline::forcing() {
  calibrate();
  return *gamma_;
}

const DissipationMap& Pipeline::dissipation() {
  if (!p_) {
    const auto& c = calibrate();
    p_ = staged("bound", [&] {
      if (!nonlinear()) return DissipationMap::linear_pipeline(c.T, c.C_T);
      return DissipationMap::nonlinear_pipeline(c.T, c.K, HFunction(law_, c.damper_mass));
    });
  }
  return *p_;
}

const OdeSolution& Pipeline::ode() {
  if (!ode_) {
    const auto& p = dissipation();
    const auto& c = calibrate();
    ode_ = staged("bound", [&] {
      const double H = ode_horizon();
      const double dt = scenario_.numerics.ode_dt.value_or(H / kOdeIntervals);
      return solve_ode(OdeProblem{p, *gamma_, c.E0}, H, dt);
    });
  }
  return *ode_;
}

const BoundCurve& Pipeline::envelope() {
  if (!envelope_) {
    const auto& sol = ode();
    const auto& c = calibrate();
    const auto& tr = simulate();
    staged("bound", [&] {
      const double factor = scenario_.constants.envelope_factor;
      std::vector<double> times;
      for (double t : sol.t) {
        if (t >= c.T) times.push_back(t);
      }
      envelope_ = wavedecay::envelope(sol.dense, *gamma_, c.T, ode_horizon(), times, factor);

      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < tr.size(); ++k) {
        if (tr.t[k] >= c.T) idx.push_back(k);
      }
      const auto t = subset(tr.t, idx);
      const auto B = wavedecay::envelope(sol.dense, *gamma_, c.T, ode_horizon(), t, factor);
      dominance_ = dominance_check(t, subset(tr.E, idx), B.B);
    });
  }
  return *envelope_;
}

const ClassificationReport& Pipeline::classify() {
  if (classification_) return *classification_;
  const auto& p = dissipation();
  const auto& sol = ode();
  const auto& c = calibrate();
  classification_ = staged("classify", [&] {
    ClassificationReport r;
    ClassifyOptions opts;
    opts.horizon = ode_horizon();
    const auto w = late_window(ode_horizon(), c.T);
    opts.fit_t0 = w.t0;
    opts.fit_t1 = w.t1;
    r.classification = wavedecay::classify(p, *gamma_, c.E0, opts);
    if (r.classification.bound) {
      std::vector<double> y;
      y.reserve(sol.t.size());
      for (double t : sol.t) y.push_back(r.classification.bound(t));
      r.bound_check = dominance_check(sol.t, sol.S, y);
    }

    const double T = c.T;
    r.iteration_steps = std::min<std::size_t>(
        kMaxIterationSteps, static_cast<std::size_t>(std::floor(ode_horizon() / T)));
    try {
      std::vector<double> delta(r.iteration_steps);
      for (std::size_t m = 0; m < r.iteration_steps; ++m) {
        delta[m] = window_integral(*gamma_, m * T, T);
      }
      const auto W = discrete_iteration(
          c.E0, [&p, T](double x) { return T * p(x); }, delta, r.iteration_steps);
      std::vector<double> tm(W.size());
      std::vector<double> Sm(W.size());
      for (std::size_t m = 0; m < W.size(); ++m) {
        tm[m] = std::min(m * T, sol.dense.t_max());
        Sm[m] = sol.dense(tm[m]);
      }
      r.iteration_check = dominance_check(tm, W, Sm);
    } catch (const Error& e) {
      r.iteration_error = e.what();
    }
    return r;
  });
  return *classification_;
}

void Pipeline::predict(VerificationVerdict& v) {
  const auto& c = calibrate();
  const auto& gamma = *gamma_;
  auto from_classifier = [&] {
    const auto& cl = classify().classification;
    if (cl.prediction.valid) {
      v.predicted = cl.prediction;
      v.prediction_source = "classifier";
    }
  };

  switch (law_.kind()) {
    case DampingLaw::Kind::linear: {
      const double C = 1.0 / (c.T * c.C_T);
      if (gamma.identically_zero()) {
        v.predicted = {true, DecayModel::exponential, C};
        v.prediction_source = "rate-table";
        return;
      }
      const auto& rho = force_.profile();
      if (force_.is_separable() && (rho.kind == TimeProfile::Kind::exponential ||
                                    rho.kind == TimeProfile::Kind::polynomial)) {
        GammaForm form;
        form.kind = rho.kind == TimeProfile::Kind::exponential ? GammaForm::Kind::exponential
                                                               : GammaForm::Kind::polynomial;
        form.M = c.C1T * rho.M * rho.M;
        form.theta = 2.0 * rho.theta;
        try {
          const auto rate = linear_rate_table(C, form, c.T, c.E0, ode_horizon());
          v.predicted = {true, rate.model, rate.parameter};
          v.prediction_source = "rate-table";
          return;
        } catch (const InvalidArgument&) {
          // Outside the table (e.g. theta <= 1); defer to the classifier.
        }
      }
      from_classifier();
      return;
    }
    case DampingLaw::Kind::sublinear: {
      const double r0 = law_.r0();
      const double saturated = 2.0 * r0 / (1.0 - r0);
      double exponent = saturated;
      const bool decays_fast = gamma.identically_zero() ||
                               (force_.is_separable() &&
                                force_.profile().kind == TimeProfile::Kind::exponential);
      if (!decays_fast) {
        const auto w = late_window(ode_horizon(), c.T);
        const auto t = numerics::logspace(std::log10(w.t0), std::log10(w.t1), 200);
        std::vector<double> g(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) g[k] = gamma(t[k]);
        try {
          const double theta = fit_decay(t, g, w.t0, w.t1, DecayModel::polynomial).parameter;
          if (theta <= (1.0 + r0) / (1.0 - r0)) exponent = 2.0 * r0 * theta / (1.0 + r0);
        } catch (const Error&) {
          // Gamma vanishes numerically on the window: saturated rate.
        }
      }
      v.predicted = {true, DecayModel::polynomial, exponent};
      v.prediction_source = "built-in";
      return;
    }
    case DampingLaw::Kind::superlinear:
      v.predicted = {true, DecayModel::inverse_log, 0.0};
      v.prediction_source = "built-in";
      return;
    case DampingLaw::Kind::table:
      from_classifier();
      return;
  }
}

const VerificationVerdict& Pipeline::verify() {
  if (verdict_) return *verdict_;
  const auto& tr = simulate();
  const auto& env = envelope();
  const auto& cl = classify();
  const auto& c = calibrate();
  verdict_ = staged("verify", [&] {
    VerificationVerdict v;
    v.tag = cl.classification.tag;
    v.dominance = *dominance_;
    v.tolerance = scenario_.constants.agreement_tolerance;

    if (scenario_.numerics.fit_window) {
      v.measured_window = {(*scenario_.numerics.fit_window)[0],
                           (*scenario_.numerics.fit_window)[1]};
    } else {
      v.measured_window = late_window(scenario_.numerics.horizon, c.T);
    }
    v.envelope_window = late_window(ode_horizon(), c.T);
    try {
      v.measured_fit = fit_best(tr.t, tr.E, v.measured_window.t0, v.measured_window.t1);
    } catch (const Error& e) {
      v.fit_note = std::string("measured energy: ") + e.what();
    }

    predict(v);
    if (!v.predicted.valid) return v;
    try {
      v.measured_predicted_fit = fit_decay(tr.t, tr.E, v.measured_window.t0,
                                           v.measured_window.t1, v.predicted.model);
    } catch (const Error& e) {
      if (v.fit_note.empty()) v.fit_note = std::string("measured energy: ") + e.what();
    }
    try {
      v.envelope_fit = fit_decay(env.t, env.B, v.envelope_window.t0, v.envelope_window.t1,
                                 v.predicted.model);
    } catch (const Error& e) {
      v.fit_note += (v.fit_note.empty() ? "" : "; ") + std::string("envelope: ") + e.what();
    }

    bool close = false;
    if (v.predicted.model == DecayModel::inverse_log) {
      close = inverse_log_band(env.t, env.B, v.envelope_window);
    } else if (v.envelope_fit) {
      close = std::abs(v.envelope_fit->parameter - v.predicted.parameter) <=
              v.tolerance * std::abs(v.predicted.parameter);
    }
    v.agreement = v.dominance.pass && close;
    return v;
  });
  return *verdict_;
}

void Pipeline::write_trace(const std::string& dir) {
  const auto path = ensure_dir(dir) / "trace.csv";
  simulate().write_csv(path.string());
}

void Pipeline::write_bound(const std::string& dir) {
  const auto root = ensure_dir(dir);
  const auto& sol = ode();
  const auto& env = envelope();
  write_csv((root / "ode.csv").string(), {"t", "S", "Gamma"}, {&sol.t, &sol.S, &sol.gamma});
  write_csv((root / "envelope.csv").string(), {"t", "B"}, {&env.t, &env.B});
}

void Pipeline::write_constants(const std::string& dir) {
  const auto root = ensure_dir(dir);
  json j = calibrate().to_json();
  j["seed"] = seed_;
  write_json(root / "constants.json", j);
}

void Pipeline::write_classification(const std::string& dir) {
  write_json(ensure_dir(dir) / "classification.json", classify().to_json());
}

void Pipeline::write_verdict(const std::string& dir) {
  const auto& v = verify();
  const auto& c = calibrate();
  json j = v.to_json();
  j["constants"] = {{"T", c.T}, {"C_T", c.C_T}, {"C1T", c.C1T}, {"K", c.K}};
  j["seed"] = seed_;
  write_json(ensure_dir(dir) / "verdict.json", j);
}

void Pipeline::write_conjugate(const std::string& dir) {
  const auto root = ensure_dir(dir);
  const auto& c = calibrate();
  staged("forcing", [&] {
    const ConjugatePair pair(c.T, c.C_T, h_function());
    const auto s = numerics::logspace(-6.0, 1.0, 141);
    std::vector<double> psi(s.size());
    std::vector<double> psi_star(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      psi[k] = pair.psi(s[k]);
      psi_star[k] = pair.psi_star(s[k]);
    }
    write_csv((root / "conjugate.csv").string(), {"s", "psi", "psi_star"},
              {&s, &psi, &psi_star});
  });
}

void Pipeline::write_all(const std::string& dir) {
  const auto root = ensure_dir(dir);
  json cfg = scenario_.to_json();
  cfg["seed"] = seed_;
  write_json(root / "scenario.json", cfg);
  write_trace(dir);
  write_constants(dir);
  write_bound(dir);
  write_classification(dir);
  write_conjugate(dir);
  write_verdict(dir);
}

}  // namespace wavedecay

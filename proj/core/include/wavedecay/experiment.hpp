#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "wavedecay/decay_bounds.hpp"
#include "wavedecay/fit.hpp"
#include "wavedecay/observability.hpp"
#include "wavedecay/scenario.hpp"

namespace wavedecay {

/// Constants feeding the comparison ODE, with where each one came from.
struct CalibratedConstants {
  double T = 0.0;
  ControlTime control;
  double C_T = 0.0;
  double C1T = 0.0;
  /// Nonlinear pipeline only (0 otherwise).
  double K = 0.0;
  double E0 = 0.0;
  /// T times the integral of a.
  double damper_mass = 0.0;
  std::string C_T_source;
  std::string C1T_source;
  std::string K_source;
  std::optional<ObservabilityReport> report;

  nlohmann::json to_json() const;
};

struct FitWindow {
  double t0 = 0.0;
  double t1 = 0.0;
};

struct VerificationVerdict {
  DecayCase tag = DecayCase::unclassified;
  DominanceResult dominance;

  /// Best of the three models on the measured energy, if the window allowed a fit.
  std::optional<DecayFit> measured_fit;
  FitWindow measured_window;
  /// Predicted model fitted to the measured energy and to the envelope.
  std::optional<DecayFit> measured_predicted_fit;
  std::optional<DecayFit> envelope_fit;
  FitWindow envelope_window;
  std::string fit_note;

  PredictedForm predicted;
  /// "rate-table", "built-in", "classifier" or "none".
  std::string prediction_source = "none";
  bool agreement = false;
  double tolerance = 0.15;

  nlohmann::json to_json() const;
};

/// Classifier output plus the two comparison checks run against S.
struct ClassificationReport {
  DecayClassification classification;
  std::optional<DominanceResult> bound_check;
  std::optional<DominanceResult> iteration_check;
  std::size_t iteration_steps = 0;
  std::string iteration_error;

  nlohmann::json to_json() const;
};

/// simulate -> calibrate -> forcing -> bound -> classify -> verify. Each stage
/// runs its prerequisites once and caches the result; failures are rethrown
/// as StageError tagged with the stage name.
class Pipeline {
 public:
  Pipeline(Scenario scenario, std::uint64_t seed);

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  const Grid& grid() const { return grid_; }

  const EnergyTrace& simulate();
  const CalibratedConstants& calibrate();
  /// Gamma for the configured law.
  const GammaProfile& forcing();
  const DissipationMap& dissipation();
  const OdeSolution& ode();
  const BoundCurve& envelope();
  const ClassificationReport& classify();
  const VerificationVerdict& verify();

  /// Standalone constants estimate (always runs the ensemble).
  ObservabilityReport observability();

  void write_trace(const std::string& dir);
  void write_bound(const std::string& dir);
  void write_constants(const std::string& dir);
  void write_classification(const std::string& dir);
  void write_verdict(const std::string& dir);
  /// s, psi(s), psi*(s) on 141 log-spaced points in [1e-6, 10].
  void write_conjugate(const std::string& dir);
  void write_all(const std::string& dir);

  double ode_horizon() const;

 private:
  bool nonlinear() const;
  EnsembleConfig ensemble_config() const;
  HFunction h_function();
  void predict(VerificationVerdict& v);

  Scenario scenario_;
  std::uint64_t seed_;
  Grid grid_;
  DamperProfile damper_;
  DampingLaw law_;
  ForcingTerm force_;

  std::optional<EnergyTrace> trace_;
  std::optional<CalibratedConstants> constants_;
  std::optional<GammaProfile> gamma_;
  std::optional<DissipationMap> p_;
  std::optional<OdeSolution> ode_;
  std::optional<BoundCurve> envelope_;
  std::optional<DominanceResult> dominance_;
  std::optional<ClassificationReport> classification_;
  std::optional<VerificationVerdict> verdict_;
};

nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const DominanceResult& d);
nlohmann::json to_json(const ObservabilityReport& r);

}  // namespace wavedecay

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavedecay/damping.hpp"
#include "wavedecay/forcing.hpp"
#include "wavedecay/geometry.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay {

/// Random probe runs used to estimate observability constants.
struct EnsembleConfig {
  Grid grid = Grid::interval(1.0, 200);
  DamperProfile damper;
  DampingLaw law = DampingLaw::linear();
  /// Force applied to the members; each member scales it by an amplitude drawn
  /// log-uniformly from [amplitude_min, amplitude_max] when `random_forcing`.
  ForcingTerm forcing;
  bool random_forcing = true;
  double amplitude_min = 1e-3;
  double amplitude_max = 1.0;
  double T = 1.0;
  double horizon = 10.0;
  double dt = 0.0;
  std::size_t sample_stride = 1;
  std::size_t runs = 32;
  int modes = 16;
  double safety_factor = 2.0;
  std::uint64_t seed = 0;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t workers = 0;
  bool keep_traces = false;
};

/// One ensemble member's initial data: random sine-series coefficients scaled
/// to unit energy.
WaveState ensemble_member_state(const Grid& grid, int modes, std::uint64_t seed,
                                std::size_t index);

/// Forcing amplitude of member `index` (1 when forcing is not randomized).
double ensemble_member_amplitude(const EnsembleConfig& config, std::size_t index);

struct ObservabilityReport {
  std::string kind;  // "linear" or "nonlinear"
  std::size_t runs = 0;
  int modes = 0;
  bool forced = false;
  std::uint64_t seed = 0;
  double T = 0.0;
  double safety_factor = 2.0;
  std::size_t windows_used = 0;
  std::size_t windows_skipped = 0;

  /// Ratios per member, one per window start 0, T, 2T, ...
  std::vector<std::vector<double>> ratios;
  std::vector<double> window_starts;
  double max_ratio = 0.0;
  /// max(1, safety_factor * max_ratio)
  double constant = 0.0;

  /// Linear chain: C_hat_T = constant, C_T = 4 C_hat_T,
  /// C_tilde_T = 1 + T e^T C_hat_T, C1T = 2 (C_tilde_T + 1). Nonlinear reports
  /// take C_hat_T, C_tilde_T and C1T from the quadratic ratios and set
  /// C_T = constant.
  double C_hat_T = 0.0;
  double C_T = 0.0;
  double C_tilde_T = 0.0;
  double C1T = 0.0;

  /// Quadratic-dissipation ratios from the same runs (nonlinear reports).
  std::optional<double> linear_max_ratio;

  std::vector<EnergyTrace> traces;
};

/// Ratios E(t) / (integral of a v^2 + |f|^2 over [t, t + T]).
ObservabilityReport estimate_linear_constant(const EnsembleConfig& config);

/// Ratios E(t) / h(integral of a g(v) v + |f|^2 over [t, t + T]). The linear
/// chain (C1T) is filled from the quadratic ratios of the same runs.
ObservabilityReport estimate_nonlinear_constant(const EnsembleConfig& config,
                                                const DampingLaw& law, const HFunction& h);

}  // namespace wavedecay

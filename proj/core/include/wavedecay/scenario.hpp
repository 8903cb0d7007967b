#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavedecay/damping.hpp"
#include "wavedecay/forcing.hpp"
#include "wavedecay/geometry.hpp"
#include "wavedecay/wave_solver.hpp"

namespace wavedecay {

struct GridSpec {
  int dimension = 1;
  double length = 1.0;
  int nodes = 400;  // cells per direction: dx = length / nodes
  double length2 = 1.0;
  int nodes2 = 0;
};

struct DamperSpec {
  std::vector<Interval> intervals;
  std::vector<Rect> rectangles;
  double amplitude = 1.0;
  std::optional<double> smoothing;  // default: 2 dx
};

struct LawSpec {
  std::string kind = "linear";  // linear | sublinear | superlinear | table
  double r0 = 0.5;
  std::string file;
  double h0_exponent = 1.0;
};

struct ForcingSpec {
  std::string profile = "zero";  // zero | exponential | polynomial | table | field
  double M = 0.0;
  double theta = 0.0;
  std::string file;
  std::string shape = "sine";  // sine | bump
  int mode = 1;
  double centre = 0.5;
  double width = 0.25;
};

struct InitialSpec {
  std::string kind = "sine_mode";  // sine_mode | fourier | table
  int mode = 1;
  double amplitude = 1.0;
  double velocity = 0.0;
  std::vector<double> u0;
  std::vector<double> u1;
  std::string file;
};

struct NumericsSpec {
  std::optional<double> dt;
  double dt_factor = 0.45;
  double horizon = 10.0;
  std::size_t sample_stride = 1;
  std::optional<double> ode_horizon;
  std::optional<double> ode_dt;
  std::optional<std::array<double, 2>> fit_window;
};

struct ConstantsSpec {
  std::optional<double> T;
  std::optional<double> C_T;
  std::optional<double> C1T;
  std::optional<double> K;
  double envelope_factor = 2.0;
  double safety_factor = 2.0;
  double agreement_tolerance = 0.15;
};

struct EnsembleSpec {
  std::size_t runs = 32;
  int modes = 16;
  bool random_forcing = true;
  std::optional<double> horizon;
  std::optional<int> nodes;
  std::size_t workers = 0;
};

/// A complete experiment description, read from and written to JSON.
/// Relative file names resolve against `base_dir` (the config's folder).
struct Scenario {
  std::string name;
  GridSpec grid;
  DamperSpec damper;
  LawSpec law;
  ForcingSpec forcing;
  InitialSpec initial;
  NumericsSpec numerics;
  ConstantsSpec constants;
  EnsembleSpec ensemble;
  std::optional<std::uint64_t> seed;
  std::string base_dir;

  static Scenario from_json(const nlohmann::json& j, const std::string& base_dir = "");
  static Scenario from_file(const std::string& path);
  nlohmann::json to_json() const;

  Grid build_grid() const;
  /// Grid of the observability ensemble (may be coarser).
  Grid build_ensemble_grid() const;
  DamperProfile build_damper(const Grid& grid) const;
  DampingLaw build_law() const;
  ForcingTerm build_forcing(const Grid& grid) const;
  WaveState build_initial(const Grid& grid) const;

  /// Closed-form control time in 1D; user-supplied T in 2D.
  ControlTime control_time() const;
  /// Configured T, else 1.25 T_min.
  double working_T() const;
  double dt(const Grid& grid) const;
  double ode_horizon() const;

  /// Builds every component and checks the cross-field rules.
  void validate() const;

  std::string resolve(const std::string& file) const;
};

/// Seed precedence: explicit flag, then config, then WAVEDECAY_SEED, then 1.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Scenario& s);

}  // namespace wavedecay

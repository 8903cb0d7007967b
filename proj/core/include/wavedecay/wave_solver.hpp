#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wavedecay/damping.hpp"
#include "wavedecay/forcing.hpp"
#include "wavedecay/geometry.hpp"

namespace wavedecay {

/// Nodal displacement u and velocity v at time t; boundary entries are 0.
struct WaveState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

using FieldFn = std::function<double(double x, double y)>;

/// Samples u0, u1 at the interior nodes.
WaveState make_state(const Grid& grid, const FieldFn& u0, const FieldFn& u1);

/// E = 1/2 (|v|^2 + |grad u|^2) with one-sided differences between nodes.
double energy(const WaveState& state, const Grid& grid);

/// Sampled energy functional and the two accumulated fluxes of the energy
/// identity E(t) + D(t) = E(0) + F(t).
struct EnergyTrace {
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> D;   // integral of a g(v) v
  std::vector<double> F;   // integral of f v
  std::vector<double> residual;  // E + D - F - E(0)
  std::vector<double> Q;   // integral of a v^2
  std::vector<double> FF;  // integral of |f|^2
  /// Energy at the most recent half step (leapfrog-staggered). With f = 0 it
  /// is nonincreasing step to step for any a >= 0 and monotone g.
  std::vector<double> E_staggered;

  /// Integrals over the windows [mW, (m+1)W] when RunOptions::window = W > 0,
  /// accumulated per window so they keep full precision after the cumulative
  /// columns stop resolving late increments.
  std::vector<double> window_D;
  std::vector<double> window_Q;
  std::vector<double> window_FF;
  double dt = 0.0;
  std::size_t steps = 0;

  std::size_t size() const { return t.size(); }
  double max_energy() const;
  double max_abs_residual() const;

  /// Columns t, E, D, F, identity_residual.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// Explicit leapfrog in the stiffness, implicit midpoint in the damping:
///   w       = v^n + dt/2 (L u^n + f^n - a g(v^n))
///   u^{n+1} = u^n + dt w
///   v^{n+1} + dt/2 a g(v^{n+1}) = w + dt/2 (L u^{n+1} + f^{n+1})
/// The last line is one scalar monotone solve per damped node.
class WaveSolver {
 public:
  WaveSolver(const Grid& grid, const DamperProfile& damper, const DampingLaw& law,
             const ForcingTerm& force, double dt, WaveState initial);

  /// Advances one step. The staggered energy is only refreshed when asked.
  void step(bool track_staggered = true);

  const WaveState& state() const { return state_; }
  double dt() const { return dt_; }

  /// Integrands of the identity at the current time level.
  double dissipation_rate() const { return q_damp_; }
  double work_rate() const { return q_work_; }
  double quadratic_dissipation_rate() const { return q_quad_; }
  double force_norm_sq() const { return q_force_; }
  double staggered_energy() const { return e_stag_; }

 private:
  void laplacian(const std::vector<double>& u, std::vector<double>& out) const;
  void refresh_rates();

  const Grid& grid_;
  const DamperProfile& damper_;
  const DampingLaw& law_;
  const ForcingTerm& force_;
  double dt_;
  WaveState state_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> damped_;
  std::vector<double> lap_;
  std::vector<double> f_;
  std::vector<double> gv_;
  std::vector<double> w_;
  std::vector<double> u_prev_;
  double q_damp_ = 0.0;
  double q_work_ = 0.0;
  double q_quad_ = 0.0;
  double q_force_ = 0.0;
  double e_stag_ = 0.0;
};

/// Rejects steps beyond 0.9 of the explicit stability limit.
void check_cfl(const Grid& grid, double dt);

/// One step from `state`.
WaveState step(const WaveState& state, const Grid& grid, const DamperProfile& damper,
               const DampingLaw& law, const ForcingTerm& force, double dt);

struct RunOptions {
  double dt = 0.0;
  double horizon = 0.0;
  std::size_t sample_stride = 1;
  /// Window length for EnergyTrace::window_*; 0 disables them.
  double window = 0.0;
};

/// Steps to the horizon (the step is shrunk so that an integer number of
/// steps lands on it) and samples every `sample_stride` steps plus the end.
EnergyTrace run(const Grid& grid, const DamperProfile& damper, const DampingLaw& law,
                const ForcingTerm& force, const WaveState& initial,
                const RunOptions& options);

}  // namespace wavedecay

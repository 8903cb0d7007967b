#include "wavedecay/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wavedecay/csv.hpp"
#include "wavedecay/error.hpp"

namespace wavedecay {

WaveState make_state(const Grid& grid, const FieldFn& u0, const FieldFn& u1) {
  WaveState s;
  s.u.assign(grid.node_count(), 0.0);
  s.v.assign(grid.node_count(), 0.0);
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.is_boundary(k)) continue;
      const double y = grid.dimension() == 2 ? grid.y(j) : 0.0;
      s.u[k] = u0(grid.x(i), y);
      s.v[k] = u1(grid.x(i), y);
    }
  }
  return s;
}

namespace {

double gradient_energy(const std::vector<double>& a, const std::vector<double>& b,
                       const Grid& grid) {
  // <grad a, grad b> summed over all edges.
  double sx = 0.0;
  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t row = j * nx;
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      sx += (a[row + i + 1] - a[row + i]) * (b[row + i + 1] - b[row + i]);
    }
  }
  double total = sx / (grid.dx() * grid.dx());
  if (grid.dimension() == 2) {
    double sy = 0.0;
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = j * nx + i;
        sy += (a[k + nx] - a[k]) * (b[k + nx] - b[k]);
      }
    }
    total += sy / (grid.dy() * grid.dy());
  }
  return total * grid.cell_volume();
}

double squared_norm(const std::vector<double>& v, const Grid& grid) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s * grid.cell_volume();
}

}  // namespace

double energy(const WaveState& state, const Grid& grid) {
  if (state.u.size() != grid.node_count() || state.v.size() != grid.node_count()) {
    throw InvalidArgument("state does not match the grid");
  }
  return 0.5 * (squared_norm(state.v, grid) + gradient_energy(state.u, state.u, grid));
}

double EnergyTrace::max_energy() const {
  return E.empty() ? 0.0 : *std::max_element(E.begin(), E.end());
}

double EnergyTrace::max_abs_residual() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, std::abs(r));
  return m;
}

void EnergyTrace::write_csv(std::ostream& out) const {
  wavedecay::write_csv(out, {"t", "E", "D", "F", "identity_residual"},
                       {&t, &E, &D, &F, &residual});
}

void EnergyTrace::write_csv(const std::string& path) const {
  wavedecay::write_csv(path, {"t", "E", "D", "F", "identity_residual"},
                       {&t, &E, &D, &F, &residual});
}

void check_cfl(const Grid& grid, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  const double limit = grid.max_stable_dt(0.9);
  if (dt > limit * (1.0 + 1e-12)) {
    throw InvalidArgument("time step " + format_double(dt) +
                          " violates the CFL limit " + format_double(limit));
  }
}

WaveSolver::WaveSolver(const Grid& grid, const DamperProfile& damper,
                       const DampingLaw& law, const ForcingTerm& force, double dt,
                       WaveState initial)
    : grid_(grid),
      damper_(damper),
      law_(law),
      force_(force),
      dt_(dt),
      state_(std::move(initial)),
      interior_(grid.interior()) {
  check_cfl(grid, dt);
  const std::size_t n = grid.node_count();
  if (state_.u.size() != n || state_.v.size() != n) {
    throw InvalidArgument("initial state does not match the grid");
  }
  if (damper.values().size() != n) {
    throw InvalidArgument("damper profile does not match the grid");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(state_.u[k]) || !std::isfinite(state_.v[k])) {
      throw NumericalError("initial data is not finite");
    }
    if (grid.is_boundary(k)) {
      state_.u[k] = 0.0;
      state_.v[k] = 0.0;
    }
  }
  for (std::size_t k : interior_) {
    if (damper[k] > 0.0) damped_.push_back(k);
  }
  lap_.assign(n, 0.0);
  f_.assign(n, 0.0);
  gv_.assign(n, 0.0);
  w_.assign(n, 0.0);
  laplacian(state_.u, lap_);
  force_.evaluate(state_.t, f_);
  for (std::size_t k : damped_) gv_[k] = law_.g(state_.v[k]);
  refresh_rates();
  e_stag_ = energy(state_, grid_);
}

void WaveSolver::laplacian(const std::vector<double>& u, std::vector<double>& out) const {
  const double ix2 = 1.0 / (grid_.dx() * grid_.dx());
  const std::size_t nx = grid_.nx();
  if (grid_.dimension() == 1) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * ix2;
    }
    return;
  }
  const double iy2 = 1.0 / (grid_.dy() * grid_.dy());
  for (std::size_t k : interior_) {
    out[k] = (u[k - 1] - 2.0 * u[k] + u[k + 1]) * ix2 +
             (u[k - nx] - 2.0 * u[k] + u[k + nx]) * iy2;
  }
}

void WaveSolver::refresh_rates() {
  const auto& v = state_.v;
  double damp = 0.0;
  double quad = 0.0;
  for (std::size_t k : damped_) {
    damp += damper_[k] * gv_[k] * v[k];
    quad += damper_[k] * v[k] * v[k];
  }
  double work = 0.0;
  double ff = 0.0;
  double kin = 0.0;
  if (force_.identically_zero()) {
    for (std::size_t k : interior_) kin += v[k] * v[k];
  } else {
    for (std::size_t k : interior_) {
      work += f_[k] * v[k];
      ff += f_[k] * f_[k];
      kin += v[k] * v[k];
    }
  }
  if (!std::isfinite(kin) || !std::isfinite(damp) || !std::isfinite(work)) {
    throw NumericalError("non-finite field at t = " + format_double(state_.t));
  }
  const double cv = grid_.cell_volume();
  q_damp_ = damp * cv;
  q_quad_ = quad * cv;
  q_work_ = work * cv;
  q_force_ = force_.is_separable() ? force_.norm_sq(state_.t) : ff * cv;
}

void WaveSolver::step(bool track_staggered) {
  const double h = 0.5 * dt_;
  auto& u = state_.u;
  auto& v = state_.v;
  for (std::size_t k : interior_) w_[k] = v[k] + h * (lap_[k] + f_[k]);
  for (std::size_t k : damped_) w_[k] -= h * damper_[k] * gv_[k];

  if (track_staggered) u_prev_ = u;
  for (std::size_t k : interior_) u[k] += dt_ * w_[k];
  state_.t += dt_;
  if (track_staggered) {
    e_stag_ = 0.5 * (squared_norm(w_, grid_) + gradient_energy(u_prev_, u, grid_));
  }

  laplacian(u, lap_);
  force_.evaluate(state_.t, f_);
  for (std::size_t k : interior_) v[k] = w_[k] + h * (lap_[k] + f_[k]);
  for (std::size_t k : damped_) {
    v[k] = implicit_damp_solve(law_, h * damper_[k], v[k]);
    gv_[k] = law_.g(v[k]);
  }
  refresh_rates();
}

WaveState step(const WaveState& state, const Grid& grid, const DamperProfile& damper,
               const DampingLaw& law, const ForcingTerm& force, double dt) {
  WaveSolver solver(grid, damper, law, force, dt, state);
  solver.step();
  return solver.state();
}

EnergyTrace run(const Grid& grid, const DamperProfile& damper, const DampingLaw& law,
                const ForcingTerm& force, const WaveState& initial,
                const RunOptions& options) {
  if (!(options.horizon >= 0.0) || !std::isfinite(options.horizon)) {
    throw InvalidArgument("horizon must be nonnegative");
  }
  if (options.sample_stride == 0) throw InvalidArgument("sample stride must be positive");
  check_cfl(grid, options.dt);

  std::size_t steps = 0;
  double dt = options.dt;
  if (options.horizon > 0.0) {
    steps = static_cast<std::size_t>(std::ceil(options.horizon / options.dt - 1e-9));
    steps = std::max<std::size_t>(steps, 1);
    dt = options.horizon / static_cast<double>(steps);
  }

  WaveSolver solver(grid, damper, law, force, dt, initial);
  EnergyTrace trace;
  trace.dt = dt;
  trace.steps = steps;
  const double e0 = energy(solver.state(), grid);
  double D = 0.0, F = 0.0, Q = 0.0, FF = 0.0;

  auto sample = [&] {
    const double e = energy(solver.state(), grid);
    trace.t.push_back(solver.state().t);
    trace.E.push_back(e);
    trace.D.push_back(D);
    trace.F.push_back(F);
    trace.residual.push_back(e + D - F - e0);
    trace.Q.push_back(Q);
    trace.FF.push_back(FF);
    trace.E_staggered.push_back(solver.staggered_energy());
  };

  std::size_t windows = 0;
  if (options.window > 0.0) {
    windows = static_cast<std::size_t>(std::floor(options.horizon / options.window + 1e-9));
    trace.window_D.assign(windows, 0.0);
    trace.window_Q.assign(windows, 0.0);
    trace.window_FF.assign(windows, 0.0);
  }
  // Splits a step's contribution between the windows it overlaps.
  auto add_to_windows = [&](double a, double d, double q, double ff) {
    const double b = a + dt;
    auto k = static_cast<std::size_t>(std::floor(a / options.window + 1e-12));
    double lo = a;
    while (k < windows && lo < b) {
      const double hi = std::min(b, options.window * static_cast<double>(k + 1));
      const double share = (hi - lo) / dt;
      trace.window_D[k] += share * d;
      trace.window_Q[k] += share * q;
      trace.window_FF[k] += share * ff;
      lo = hi;
      ++k;
    }
  };

  sample();
  const double start = initial.t;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double d0 = solver.dissipation_rate();
    const double w0 = solver.work_rate();
    const double q0 = solver.quadratic_dissipation_rate();
    const double f0 = solver.force_norm_sq();
    const bool sampled = n % options.sample_stride == 0 || n == steps;
    solver.step(sampled);
    const double h = 0.5 * dt;
    const double dD = h * (d0 + solver.dissipation_rate());
    const double dQ = h * (q0 + solver.quadratic_dissipation_rate());
    const double dFF = h * (f0 + solver.force_norm_sq());
    D += dD;
    F += h * (w0 + solver.work_rate());
    Q += dQ;
    FF += dFF;
    if (windows > 0) add_to_windows(dt * static_cast<double>(n - 1), dD, dQ, dFF);
    if (sampled) {
      sample();
      // Pin the sample time to the step count to avoid drift in t.
      trace.t.back() = start + dt * static_cast<double>(n);
    }
  }
  return trace;
}

}  // namespace wavedecay

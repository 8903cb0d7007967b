#include "wavedecay/observability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <thread>

#include "wavedecay/error.hpp"
#include "wavedecay/numerics.hpp"

namespace wavedecay {
namespace {

constexpr double kEnergyFloor = 1e-200;

std::mt19937_64 member_rng(std::uint64_t seed, std::size_t index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), stream};
  return std::mt19937_64(seq);
}

struct WindowSums {
  std::vector<double> E;      // energy at each window start
  std::vector<double> quad;   // integral of a v^2 + |f|^2
  std::vector<double> nonlin; // integral of a g(v) v + |f|^2
};

WindowSums windows_of(const EnergyTrace& tr, double T, std::size_t count) {
  WindowSums w;
  for (std::size_t m = 0; m < count; ++m) {
    const double a = T * static_cast<double>(m);
    auto at = [&](const std::vector<double>& y, double t) {
      return numerics::interp_linear(tr.t, y, t);
    };
    w.E.push_back(at(tr.E, a));
    w.quad.push_back(tr.window_Q[m] + tr.window_FF[m]);
    w.nonlin.push_back(tr.window_D[m] + tr.window_FF[m]);
  }
  return w;
}

struct EnsembleOutput {
  std::vector<WindowSums> sums;
  std::vector<EnergyTrace> traces;
  std::size_t windows = 0;
};

EnsembleOutput run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.damper.values().size() != cfg.grid.node_count()) {
    throw InvalidArgument("damper profile does not match the ensemble grid");
  }
  if (cfg.damper.vanishes()) {
    throw InvalidArgument("observability needs a nonzero damper (a = 0 makes the ratio unbounded)");
  }
  if (cfg.runs == 0) throw InvalidArgument("ensemble needs at least one run");
  if (cfg.modes < 1) throw InvalidArgument("ensemble needs at least one mode");
  if (!(cfg.T > 0.0)) throw InvalidArgument("T must be positive");
  if (cfg.horizon < cfg.T) throw InvalidArgument("horizon must exceed T");
  if (!(cfg.amplitude_min > 0.0) || cfg.amplitude_max < cfg.amplitude_min) {
    throw InvalidArgument("forcing amplitude range must be positive and ordered");
  }

  const auto count = static_cast<std::size_t>(std::floor(cfg.horizon / cfg.T + 1e-9));
  const double dt = cfg.dt > 0.0 ? cfg.dt : 0.45 * cfg.grid.max_stable_dt(1.0);
  ForcingTerm base = cfg.forcing.shape().empty() ? ForcingTerm::zero(cfg.grid) : cfg.forcing;

  auto member = [&, dt](std::size_t i) {
    const WaveState init = ensemble_member_state(cfg.grid, cfg.modes, cfg.seed, i);
    const ForcingTerm f = base.scaled(ensemble_member_amplitude(cfg, i));
    RunOptions opt;
    opt.dt = dt;
    opt.horizon = cfg.horizon;
    opt.sample_stride = cfg.sample_stride;
    opt.window = cfg.T;
    return run(cfg.grid, cfg.damper, cfg.law, f, init, opt);
  };

  std::size_t workers = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, cfg.runs));

  EnsembleOutput out;
  out.windows = count;
  out.sums.resize(cfg.runs);
  if (cfg.keep_traces) out.traces.resize(cfg.runs);
  for (std::size_t start = 0; start < cfg.runs; start += workers) {
    const std::size_t stop = std::min(cfg.runs, start + workers);
    std::vector<std::future<EnergyTrace>> jobs;
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(workers == 1 ? std::launch::deferred : std::launch::async,
                                member, i));
    }
    for (std::size_t i = start; i < stop; ++i) {
      EnergyTrace tr = jobs[i - start].get();
      out.sums[i] = windows_of(tr, cfg.T, count);
      if (cfg.keep_traces) out.traces[i] = std::move(tr);
    }
  }
  return out;
}

// Ratios per member. Windows whose energy has decayed below kEnergyFloor times
// the member's peak window energy are skipped (recorded as NaN): the
// dissipation integral underflows there.
void collect(const EnsembleOutput& ens, bool nonlinear, const HFunction* h,
             ObservabilityReport& rep) {
  rep.ratios.assign(ens.sums.size(), {});
  rep.max_ratio = 0.0;
  rep.windows_used = rep.windows_skipped = 0;
  for (std::size_t i = 0; i < ens.sums.size(); ++i) {
    const auto& w = ens.sums[i];
    const double peak = w.E.empty() ? 0.0 : *std::max_element(w.E.begin(), w.E.end());
    for (std::size_t m = 0; m < w.E.size(); ++m) {
      const double obs = nonlinear ? (*h)(w.nonlin[m]) : w.quad[m];
      if (w.E[m] <= kEnergyFloor * peak) {
        rep.ratios[i].push_back(std::numeric_limits<double>::quiet_NaN());
        ++rep.windows_skipped;
        continue;
      }
      if (!(obs > 0.0)) {
        throw NumericalError("window at t = " + std::to_string(rep.window_starts[m]) +
                             " of run " + std::to_string(i) +
                             " has positive energy but no observed dissipation");
      }
      const double r = w.E[m] / obs;
      rep.ratios[i].push_back(r);
      rep.max_ratio = std::max(rep.max_ratio, r);
      ++rep.windows_used;
    }
  }
  rep.constant = std::max(1.0, rep.safety_factor * rep.max_ratio);
}

void fill_linear_chain(ObservabilityReport& rep, double C_hat) {
  rep.C_hat_T = C_hat;
  rep.C_T = 4.0 * C_hat;
  rep.C_tilde_T = 1.0 + rep.T * std::exp(rep.T) * C_hat;
  rep.C1T = 2.0 * (rep.C_tilde_T + 1.0);
}

ObservabilityReport base_report(const EnsembleConfig& cfg, const EnsembleOutput& ens) {
  ObservabilityReport rep;
  rep.runs = cfg.runs;
  rep.modes = cfg.modes;
  rep.forced = !cfg.forcing.shape().empty() && !cfg.forcing.identically_zero();
  rep.seed = cfg.seed;
  rep.T = cfg.T;
  rep.safety_factor = cfg.safety_factor;
  for (std::size_t m = 0; m < ens.windows; ++m) {
    rep.window_starts.push_back(cfg.T * static_cast<double>(m));
  }
  return rep;
}

}  // namespace

WaveState ensemble_member_state(const Grid& grid, int modes, std::uint64_t seed,
                                std::size_t index) {
  auto rng = member_rng(seed, index, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  struct Mode {
    int kx, ky;
    double a, b;
  };
  std::vector<Mode> terms;
  const int q = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(modes))));
  for (int i = 0; i < modes; ++i) {
    Mode md{};
    if (grid.dimension() == 1) {
      md.kx = i + 1;
      md.ky = 0;
    } else {
      md.kx = 1 + i % q;
      md.ky = 1 + i / q;
    }
    const double k = std::hypot(md.kx, md.ky);
    md.a = normal(rng) / k;
    md.b = normal(rng);
    terms.push_back(md);
  }
  const double L = grid.length();
  const double L2 = grid.dimension() == 2 ? grid.length2() : 1.0;
  auto basis = [&](const Mode& md, double x, double y) {
    double v = std::sin(md.kx * std::numbers::pi * x / L);
    if (md.ky > 0) v *= std::sin(md.ky * std::numbers::pi * y / L2);
    return v;
  };
  WaveState s = make_state(
      grid,
      [&](double x, double y) {
        double acc = 0.0;
        for (const auto& md : terms) acc += md.a * basis(md, x, y);
        return acc;
      },
      [&](double x, double y) {
        double acc = 0.0;
        for (const auto& md : terms) acc += md.b * basis(md, x, y);
        return acc;
      });
  const double e = energy(s, grid);
  if (e > 0.0) {
    const double scale = 1.0 / std::sqrt(e);
    for (auto& v : s.u) v *= scale;
    for (auto& v : s.v) v *= scale;
  }
  return s;
}

double ensemble_member_amplitude(const EnsembleConfig& config, std::size_t index) {
  if (!config.random_forcing) return 1.0;
  auto rng = member_rng(config.seed, index, 1);
  std::uniform_real_distribution<double> u(std::log(config.amplitude_min),
                                           std::log(config.amplitude_max));
  return std::exp(u(rng));
}

ObservabilityReport estimate_linear_constant(const EnsembleConfig& config) {
  const auto ens = run_ensemble(config);
  auto rep = base_report(config, ens);
  rep.kind = "linear";
  collect(ens, false, nullptr, rep);
  fill_linear_chain(rep, rep.constant);
  if (config.keep_traces) rep.traces = ens.traces;
  return rep;
}

ObservabilityReport estimate_nonlinear_constant(const EnsembleConfig& config,
                                                const DampingLaw& law, const HFunction& h) {
  EnsembleConfig cfg = config;
  cfg.law = law;
  const auto ens = run_ensemble(cfg);
  auto rep = base_report(cfg, ens);

  ObservabilityReport lin = rep;
  collect(ens, false, nullptr, lin);
  fill_linear_chain(rep, lin.constant);
  rep.linear_max_ratio = lin.max_ratio;

  rep.kind = "nonlinear";
  collect(ens, true, &h, rep);
  rep.C_T = rep.constant;
  if (cfg.keep_traces) rep.traces = ens.traces;
  return rep;
}

}  // namespace wavedecay

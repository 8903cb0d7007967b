#include <cmath>

#include <benchmark/benchmark.h>

#include "wavedecay/damping.hpp"
#include "wavedecay/decay_bounds.hpp"
#include "wavedecay/forcing.hpp"
#include "wavedecay/wave_solver.hpp"

namespace {

using namespace wavedecay;

WaveState standing_wave(const Grid& g) {
  return make_state(
      g, [](double x, double) { return std::sin(M_PI * x); }, [](double, double) { return 0.0; });
}

void BM_Step1D(benchmark::State& state) {
  const Grid g = Grid::interval(1.0, static_cast<int>(state.range(0)));
  const auto damper = build_damper(g, std::vector<Interval>{{0.3, 0.7}}, 1.0, 2.0 * g.dx());
  const auto law = state.range(1) == 0 ? DampingLaw::linear() : DampingLaw::sublinear(0.5);
  const auto force = ForcingTerm::zero(g);
  WaveSolver solver(g, damper, law, force, 0.45 * g.dx(), standing_wave(g));
  for (auto _ : state) solver.step(false);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.node_count()));
}
BENCHMARK(BM_Step1D)->Args({400, 0})->Args({400, 1})->Args({3200, 0})->Args({3200, 1});

void BM_Step2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = Grid::rectangle(1.0, 1.0, n, n);
  const auto damper = build_damper(g, std::vector<Rect>{{0.0, 0.2, 0.0, 1.0}}, 1.0, 2.0 * g.dx());
  const auto law = DampingLaw::linear();
  const auto force = ForcingTerm::zero(g);
  WaveSolver solver(g, damper, law, force, 0.45 * g.dx(), standing_wave(g));
  for (auto _ : state) solver.step(false);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.node_count()));
}
BENCHMARK(BM_Step2D)->Arg(48)->Arg(128);

void BM_ImplicitDampSolve(benchmark::State& state) {
  const auto law = state.range(0) == 0 ? DampingLaw::sublinear(0.5) : DampingLaw::superlinear();
  double rhs = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(implicit_damp_solve(law, 0.01, rhs));
    rhs = rhs > 0.9 ? 0.3 : rhs + 1e-3;
  }
}
BENCHMARK(BM_ImplicitDampSolve)->Arg(0)->Arg(1);

void BM_ConjugatePsiStar(benchmark::State& state) {
  const ConjugatePair pair(0.75, 4.0, HFunction(DampingLaw::sublinear(0.5), 0.5));
  double s = 1e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pair.psi_star(s));
    s = s > 1.0 ? 1e-4 : s * 1.01;
  }
}
BENCHMARK(BM_ConjugatePsiStar);

void BM_SolveOde(benchmark::State& state) {
  const HFunction h(DampingLaw::sublinear(0.5), 0.5);
  const auto p = state.range(0) == 0 ? DissipationMap::linear(0.5)
                                     : DissipationMap::nonlinear_pipeline(0.75, 10.0, h);
  const OdeProblem prob{p, GammaProfile::power_law(0.1, 2.0), 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(solve_ode(prob, 1e4, 2.5).S.back());
}
BENCHMARK(BM_SolveOde)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

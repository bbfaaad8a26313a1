#include <benchmark/benchmark.h>

#include "scou/estimation.hpp"
#include "scou/grid_hmm.hpp"
#include "scou/posterior.hpp"

namespace {

scou::SimulationOutput fixture() {
  scou::ModelParams p;
  p.eta = 0.99;
  p.delta = 0.001;
  p.sigma = 0.3;
  p.tau = 0.6;
  p.p = 0.07;
  scou::SimulationOptions opt;
  opt.seed = 11;
  opt.bounds_from_marginal_quantiles = std::make_pair(0.0002, 0.9998);
  return scou::simulate(p, 150, opt);
}

void BM_BuildTransition(benchmark::State& state) {
  const auto sim = fixture();
  const auto grid = scou::Grid::uniform(sim.params.a, sim.params.b, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(scou::build_transition(sim.params, grid));
}
BENCHMARK(BM_BuildTransition)->Arg(51)->Arg(201)->Arg(801);

void BM_LogLikelihood(benchmark::State& state) {
  const auto sim = fixture();
  const auto grid = scou::Grid::uniform(sim.params.a, sim.params.b, static_cast<std::size_t>(state.range(0)));
  const auto pi = scou::build_transition(sim.params, grid);
  const auto e = scou::build_emissions(sim.observations, sim.params, grid);
  for (auto _ : state) benchmark::DoNotOptimize(scou::log_likelihood(e, pi));
}
BENCHMARK(BM_LogLikelihood)->Arg(51)->Arg(201)->Arg(801);

void BM_ForwardBackward(benchmark::State& state) {
  const auto sim = fixture();
  const auto grid = scou::Grid::uniform(sim.params.a, sim.params.b, static_cast<std::size_t>(state.range(0)));
  const auto pi = scou::build_transition(sim.params, grid);
  const auto e = scou::build_emissions(sim.observations, sim.params, grid);
  for (auto _ : state) benchmark::DoNotOptimize(scou::forward_backward(e, pi));
}
BENCHMARK(BM_ForwardBackward)->Arg(51)->Arg(201)->Arg(801);

void BM_Fit(benchmark::State& state) {
  const auto sim = fixture();
  scou::FitConfig cfg;
  cfg.bounds = scou::OutlierBounds{sim.params.a, sim.params.b};
  cfg.grid.step = 0.1;
  cfg.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(scou::fit(sim.observations, cfg));
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

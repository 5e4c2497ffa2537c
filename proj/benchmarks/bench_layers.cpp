#include <benchmark/benchmark.h>

#include <random>

#include "coordnet/layers.hpp"
#include "coordnet/synth.hpp"

using namespace coordnet;

namespace {

// Background-scale activity: `events` uniform actions by `users` users on
// 50 keys over a week.
Dataset activity(std::size_t users, std::size_t events) {
  std::mt19937_64 rng(1);
  std::vector<ActionEvent> out;
  for (std::size_t i = 0; i < events; ++i) {
    ActionEvent e;
    e.user = "u" + std::to_string(rng() % users);
    e.timestamp = static_cast<double>(rng() % (7 * 86400));
    e.action_type = "hashtag";
    e.content = "k" + std::to_string(rng() % 50);
    out.push_back(std::move(e));
  }
  return make_dataset(std::move(out));
}

void BM_BuildLayer(benchmark::State& state) {
  const auto d = activity(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto index = build_action_index(d, "hashtag");
  for (auto _ : state) benchmark::DoNotOptimize(build_layer(index, 1.0 / 60.0, d.users));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_BuildLayer)->Args({100, 1000})->Args({1000, 10000})->Args({2000, 50000})->Unit(benchmark::kMillisecond);

void BM_BuildLayerUntruncated(benchmark::State& state) {
  const auto d = activity(1000, static_cast<std::size_t>(state.range(0)));
  const auto index = build_action_index(d, "hashtag");
  LayerOptions opt;
  opt.truncate = false;
  for (auto _ : state) benchmark::DoNotOptimize(build_layer(index, 1.0 / 60.0, d.users, opt));
}
BENCHMARK(BM_BuildLayerUntruncated)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_TuneSimulation(benchmark::State& state) {
  synth::SimulationConfig cfg;
  const auto sim = synth::simulate(synth::Pattern::burst, cfg);
  const auto index = build_action_index(sim.dataset, "hashtag");
  const auto grid = make_grid(0.0, 10.0, 0.01);
  TuneOptions opt;
  opt.time_unit_seconds = 60.0;
  opt.sweep.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tune_beta(index, grid, sim.dataset.users, opt));
}
BENCHMARK(BM_TuneSimulation)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();

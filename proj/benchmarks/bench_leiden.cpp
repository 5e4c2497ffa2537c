#include <benchmark/benchmark.h>

#include <random>

#include "coordnet/community.hpp"

using namespace coordnet;

namespace {

// Planted partition: `groups` groups of `size` nodes, dense inside, sparse
// between.
LayerGraph planted(std::size_t groups, std::size_t size, std::uint64_t seed, std::string type = "a") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = groups * size;
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  std::vector<WeightedEdge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const bool inside = i / size == j / size;
      if (u(rng) < (inside ? 0.3 : 2.0 / static_cast<double>(n))) edges.push_back({i, j, 0.1 + u(rng)});
    }
  return LayerGraph::from_edges(std::move(nodes), std::move(edges), std::move(type));
}

void BM_Detect(benchmark::State& state, Method method) {
  const auto g = planted(static_cast<std::size_t>(state.range(0)), 25, 3);
  for (auto _ : state) benchmark::DoNotOptimize(detect_communities(g, {1.0, 0, method}));
  state.counters["edges"] = static_cast<double>(g.edges.size());
}
BENCHMARK_CAPTURE(BM_Detect, leiden, Method::leiden)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Detect, louvain, Method::louvain)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Multiplex(benchmark::State& state) {
  MultiplexNetwork mx;
  for (std::int64_t l = 0; l < state.range(0); ++l)
    mx.layers.push_back(planted(16, 25, 10 + static_cast<std::uint64_t>(l), "l" + std::to_string(l)));
  mx.universe = mx.layers.front().nodes;
  for (auto _ : state) benchmark::DoNotOptimize(cluster_multiplex(mx, 0));
}
BENCHMARK(BM_Multiplex)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

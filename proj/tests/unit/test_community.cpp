#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "coordnet/community.hpp"
#include "coordnet/error.hpp"
#include "oracles.hpp"

using namespace coordnet;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
  return out;
}

LayerGraph graph(std::size_t n, std::vector<WeightedEdge> edges, std::string type = "a") {
  return LayerGraph::from_edges(names(n), std::move(edges), std::move(type));
}

Partition labels(std::size_t n, std::vector<std::uint64_t> l) { return Partition::from_labels(names(n), l); }

std::vector<WeightedEdge> clique(NodeId first, NodeId size, double w = 1.0) {
  std::vector<WeightedEdge> e;
  for (NodeId i = first; i < first + size; ++i)
    for (NodeId j = i + 1; j < first + size; ++j) e.push_back({i, j, w});
  return e;
}

std::vector<WeightedEdge> join(std::vector<WeightedEdge> a, const std::vector<WeightedEdge>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

LayerGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedEdge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(rng) < density) e.push_back({i, j, 0.1 + u(rng)});
  return graph(n, e);
}

Partition random_partition(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::uint64_t> l(n);
  for (auto& x : l) x = rng() % k;
  return labels(n, l);
}

// Q of moving node v alone into community c (or a fresh one when c == size).
double moved_q(const LayerGraph& g, const Partition& p, NodeId v, std::uint32_t c) {
  std::vector<std::uint64_t> l(p.assignment().begin(), p.assignment().end());
  l[v] = c;
  return modularity(g, Partition::from_labels(g.nodes, l)).value;
}

}  // namespace

TEST(Partition, CanonicalLabels) {
  const auto p = labels(5, {7, 3, 7, 9, 3});
  EXPECT_EQ(p.assignment(), (std::vector<std::uint32_t>{0, 1, 0, 2, 1}));
  EXPECT_EQ(p.community_count(), 3u);
  EXPECT_EQ(p.singleton_count(), 1u);
  EXPECT_EQ(p, labels(5, {1, 2, 1, 0, 2}));
  EXPECT_EQ(*p.community_of("n3"), 2u);
  EXPECT_FALSE(p.community_of("zz").has_value());
  EXPECT_EQ(Partition::singletons(names(3)).community_count(), 3u);
  EXPECT_EQ(Partition::single_community(names(3)).community_count(), 1u);
}

TEST(Partition, CsvRoundTrip) {
  const auto p = labels(6, {0, 0, 1, 2, 1, 0});
  std::stringstream s;
  write_partition_csv(s, p);
  EXPECT_EQ(read_partition_csv(s), p);
}

TEST(Modularity, TwoTriangles) {
  const auto g = graph(6, join(clique(0, 3), clique(3, 3)));
  EXPECT_DOUBLE_EQ(modularity(g, labels(6, {0, 0, 0, 1, 1, 1})).value, 0.5);
  EXPECT_NEAR(modularity(g, Partition::single_community(g.nodes)).value, 0.0, 1e-15);
}

TEST(Modularity, DegenerateGraph) {
  const auto g = graph(3, {});
  const auto q = modularity(g, Partition::singletons(g.nodes));
  EXPECT_EQ(q.value, 0.0);
  EXPECT_TRUE(q.degenerate);
  EXPECT_THROW(modularity(g, Partition::singletons(names(2))), ContractViolation);
}

TEST(Modularity, MatchesTheDoubleSum) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + rng() % 9;
    const auto g = random_graph(rng, n, 0.5);
    const auto p = random_partition(rng, n, 1 + rng() % 4);
    const double gamma = 0.5 + static_cast<double>(rng() % 3) * 0.5;
    EXPECT_NEAR(modularity(g, p, gamma).value, oracle::modularity(g, p.assignment(), gamma), 1e-12);
  }
}

TEST(Modularity, InvariantUnderRelabelingAndScaling) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 3 + rng() % 8;
    auto g = random_graph(rng, n, 0.6);
    if (g.edges.empty()) continue;
    const auto p = random_partition(rng, n, 3);
    std::vector<std::uint64_t> relabeled;
    for (auto c : p.assignment()) relabeled.push_back(100 - c);
    const double q = modularity(g, p).value;
    EXPECT_NEAR(modularity(g, Partition::from_labels(g.nodes, relabeled)).value, q, 1e-15);
    for (auto& e : g.edges) e.weight *= 7.5;
    EXPECT_NEAR(modularity(g, p).value, q, 1e-12);
    EXPECT_GE(q, -0.5 - 1e-12);
    EXPECT_LT(q, 1.0);
  }
}

TEST(Detect, TwoTriangles) {
  const auto g = graph(6, join(clique(0, 3), clique(3, 3)));
  EXPECT_EQ(detect_communities(g), labels(6, {0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(detect_communities(g, {1.0, 0, Method::louvain}), labels(6, {0, 0, 0, 1, 1, 1}));
}

TEST(Detect, WeakBridgeBetweenCliques) {
  auto e = join(clique(0, 4), clique(4, 4));
  e.push_back({3, 4, 0.01});
  const auto g = graph(8, e);
  const auto best = oracle::maximize(8, [&](const auto& l) { return oracle::modularity(g, l); });
  ASSERT_EQ(best.argmax.size(), 1u);
  const auto p = detect_communities(g, {1.0, 5, Method::leiden});
  EXPECT_EQ(p, labels(8, {0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(p.assignment(), best.argmax[0]);
}

TEST(Detect, TrivialGraphs) {
  EXPECT_EQ(detect_communities(graph(1, {})).community_count(), 1u);
  EXPECT_EQ(detect_communities(graph(4, {})), Partition::singletons(names(4)));
  EXPECT_EQ(detect_communities(graph(0, {})).size(), 0u);
  // isolates next to a connected pair stay alone
  const auto p = detect_communities(graph(4, {{0, 1, 1.0}}));
  EXPECT_EQ(p.community_of(NodeId{0}), p.community_of(NodeId{1}));
  EXPECT_EQ(p.singleton_count(), 2u);
}

TEST(Detect, DeterministicForAFixedSeed) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_graph(rng, 30, 0.15);
    for (auto m : {Method::leiden, Method::louvain}) {
      ClusteringOptions o{1.0, 42, m};
      EXPECT_EQ(detect_communities(g, o), detect_communities(g, o));
    }
  }
}

TEST(Detect, LeidenResultIsMoveStable) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 4 + rng() % 20;
    const auto g = random_graph(rng, n, 0.3);
    const auto p = detect_communities(g, {1.0, static_cast<std::uint64_t>(rep), Method::leiden});
    const double q = modularity(g, p).value;
    for (NodeId v = 0; v < n; ++v)
      for (std::uint32_t c = 0; c <= p.community_count(); ++c) EXPECT_LE(moved_q(g, p, v, c), q + 1e-12);
  }
}

TEST(Detect, FindsTheBruteForceOptimumOnSmallGraphs) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng() % 6;
    const auto g = random_graph(rng, n, 0.5);
    if (g.edges.empty()) continue;
    const auto best = oracle::maximize(n, [&](const auto& l) { return oracle::modularity(g, l); });
    double found = -1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      found = std::max(found, modularity(g, detect_communities(g, {1.0, seed, Method::leiden})).value);
    EXPECT_NEAR(found, best.q, 1e-9) << "graph " << rep;
  }
}

TEST(Multiplex, SingleLayerEqualsMonoplex) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    const auto g = random_graph(rng, 25, 0.2);
    MultiplexNetwork mx;
    mx.universe = g.nodes;
    mx.layers = {g};
    mx.omega = 0.3 * rep;
    const auto p = cluster_multiplex(mx, rep);
    EXPECT_EQ(p, detect_communities(g, {1.0, static_cast<std::uint64_t>(rep), Method::leiden}));
    EXPECT_NEAR(multislice_modularity(mx, p).value, modularity(g, p).value, 1e-15);
  }
}

TEST(Multiplex, TwoIdenticalLayers) {
  const auto g = graph(6, join(clique(0, 3), clique(3, 3)), "a");
  auto h = g;
  h.action_type = "b";
  MultiplexNetwork mx;
  mx.universe = g.nodes;
  mx.layers = {g, h};
  const auto tri = labels(6, {0, 0, 0, 1, 1, 1});
  const auto q = multislice_modularity(mx, tri);
  EXPECT_NEAR(q.intra_layer, 0.5, 1e-15);
  EXPECT_GT(q.coupling, 0.0);
  EXPECT_EQ(cluster_multiplex(mx, 0), tri);
}

TEST(Multiplex, BruteForceOnTwoLayers) {
  // layer a: two 4-cliques; layer b: the same cliques, sparser, plus noise
  auto ea = join(clique(0, 4), clique(4, 4));
  ea.push_back({3, 4, 0.05});
  std::vector<WeightedEdge> eb{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}, {4, 5, 1}, {5, 6, 1}, {6, 7, 1}, {4, 7, 1},
                               {2, 5, 0.1}};
  MultiplexNetwork mx;
  mx.universe = names(8);
  mx.layers = {graph(8, ea, "a"), graph(8, eb, "b")};
  const auto best = oracle::maximize(8, [&](const auto& l) {
    return multislice_modularity(mx, Partition::from_labels(mx.universe, {l.begin(), l.end()})).value;
  });
  ASSERT_EQ(best.argmax.size(), 1u);
  const auto p = cluster_multiplex(mx, 1);
  EXPECT_EQ(p.assignment(), best.argmax[0]);
  EXPECT_EQ(p, labels(8, {0, 0, 0, 0, 1, 1, 1, 1}));
}

TEST(Multiplex, DegenerateAndInvalid) {
  MultiplexNetwork empty;
  empty.layers = {graph(0, {}, "a")};
  const auto q = multislice_modularity(empty, Partition{});
  EXPECT_EQ(q.value, 0.0);
  EXPECT_TRUE(q.degenerate);

  MultiplexNetwork bad;
  bad.universe = names(3);
  bad.layers = {graph(3, {}, "a"), graph(3, {}, "a")};
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad.layers = {graph(3, {}, "a"), graph(2, {}, "b")};
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad.layers = {graph(3, {}, "a")};
  bad.omega = -1.0;
  EXPECT_THROW(bad.validate(), ContractViolation);
}

#include <gtest/gtest.h>

#include <random>

#include "coordnet/baselines.hpp"
#include "coordnet/error.hpp"
#include "coordnet/synth.hpp"
#include "oracles.hpp"

using namespace coordnet;
using namespace coordnet::baselines;

namespace {

ActionEvent post(std::string user, double t, std::string type, std::string key, std::string id) {
  ActionEvent e;
  e.user = std::move(user);
  e.timestamp = t;
  e.action_type = std::move(type);
  e.content = std::move(key);
  e.post_id = std::move(id);
  return e;
}

ActionEvent repost(std::string user, double t, std::string source, double source_t, std::string id) {
  auto e = post(std::move(user), t, "retweet", id, id);
  e.source_user = std::move(source);
  e.source_timestamp = source_t;
  e.source_post = "p-" + id;
  return e;
}

std::string random_string(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  std::string s(rng() % (max_len + 1), 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % alphabet);
  return s;
}

std::vector<WeightedEdge> random_edges(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedEdge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(rng) < density) e.push_back({i, j, 1.0 + std::floor(u(rng) * 20)});
  return e;
}

std::vector<WeightedEdge> clique(NodeId first, NodeId size, double w) {
  std::vector<WeightedEdge> e;
  for (NodeId i = first; i < first + size; ++i)
    for (NodeId j = i + 1; j < first + size; ++j) e.push_back({i, j, w});
  return e;
}

bool same(const std::vector<WeightedEdge>& a, const std::vector<WeightedEdge>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].u != b[i].u || a[i].v != b[i].v || a[i].weight != b[i].weight) return false;
  return true;
}

// Brute-force co-action weights of the sync baseline on original posts.
std::map<std::pair<std::string, std::string>, double> sync_oracle(const Dataset& d, const std::string& type,
                                                                  double window) {
  std::vector<ActionEvent> ev;
  for (const auto& e : d.events)
    if (e.action_type == type && !is_repost(e)) ev.push_back(e);
  std::set<double> anchors;
  for (const auto& e : ev) anchors.insert(e.timestamp);
  std::map<std::pair<std::string, std::string>, double> w;
  for (double t : anchors) {
    std::map<std::string, std::map<std::string, std::size_t>> count;
    for (const auto& e : ev)
      if (e.timestamp >= t && e.timestamp < t + window) ++count[e.content][e.user];
    for (const auto& [k, per] : count)
      for (auto a = per.begin(); a != per.end(); ++a)
        for (auto b = std::next(a); b != per.end(); ++b)
          w[{a->first, b->first}] += static_cast<double>(std::min(a->second, b->second));
  }
  return w;
}

Dataset sim_dataset(synth::Pattern kind, std::uint64_t seed) {
  synth::SimulationConfig cfg;
  cfg.seed = seed;
  return synth::simulate(kind, cfg).dataset;
}

}  // namespace

TEST(RatcliffObershelp, Examples) {
  EXPECT_DOUBLE_EQ(ratcliff_obershelp_similarity("WIKIMEDIA", "WIKIMANIA"), 14.0 / 18.0);
  EXPECT_EQ(ratcliff_obershelp_similarity("", ""), 1.0);
  EXPECT_EQ(ratcliff_obershelp_similarity("abc", ""), 0.0);
  EXPECT_EQ(ratcliff_obershelp_similarity("abc", "xyz"), 0.0);
}

TEST(RatcliffObershelp, MatchesOracle) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 5000; ++rep) {
    const auto a = random_string(rng, 12, 3);
    const auto b = random_string(rng, 12, 3);
    const double s = ratcliff_obershelp_similarity(a, b);
    EXPECT_DOUBLE_EQ(s, oracle::ro_similarity(a, b)) << a << " / " << b;
    EXPECT_EQ(s, ratcliff_obershelp_similarity(b, a));
    EXPECT_EQ(s == 1.0, a == b) << a << " / " << b;
    EXPECT_GE(s, 0.0);
  }
}

TEST(Disparity, PValue) {
  EXPECT_EQ(disparity_pvalue(3, 3, 1), 1.0);
  EXPECT_DOUBLE_EQ(disparity_pvalue(10, 40, 4), 0.421875);
  EXPECT_EQ(disparity_pvalue(1, 0, 3), 1.0);
}

TEST(Disparity, MatchesOracle) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 2 + rng() % 15;
    const auto e = random_edges(rng, n, 0.4);
    for (double alpha : {0.01, 0.05, 0.2, 0.5})
      EXPECT_TRUE(same(disparity_filter(n, e, alpha), oracle::disparity(n, e, alpha)));
  }
}

TEST(Disparity, AlphaBoundaries) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 3 + rng() % 10;
    auto e = random_edges(rng, n, 0.5);
    // a Hamiltonian cycle keeps every degree >= 2, so every p-value is < 1
    for (NodeId i = 0; i < n; ++i) e.push_back({i, static_cast<NodeId>((i + 1) % n), 1.0});
    EXPECT_EQ(disparity_filter(n, e, 1.0 + 1e-9).size(), e.size());
    EXPECT_TRUE(disparity_filter(n, e, 1e-300).empty());
  }
}

TEST(Disparity, CliquesAndStars) {
  // isolated 5-clique, 10 per pair: p = 0.75^3 everywhere
  EXPECT_TRUE(disparity_filter(5, clique(0, 5, 10.0), 0.05).empty());
  // the same clique with 20 weight-1 spokes per node stands out
  auto e = clique(0, 5, 10.0);
  NodeId next = 5;
  for (NodeId c = 0; c < 5; ++c)
    for (int s = 0; s < 20; ++s) e.push_back({c, next++, 1.0});
  const auto kept = disparity_filter(next, e, 0.05);
  EXPECT_EQ(kept.size(), 10u);
  for (const auto& k : kept) EXPECT_EQ(k.weight, 10.0);
  // a uniform 50-spoke star carries no signal
  std::vector<WeightedEdge> star;
  for (NodeId s = 1; s <= 50; ++s) star.push_back({0, s, 1.0});
  EXPECT_TRUE(disparity_filter(51, star, 0.05).empty());
}

TEST(Overlap, Examples) {
  // triangle plus pendant: edge (0,1) shares neighbor 2
  const std::vector<WeightedEdge> e{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {2, 3, 1}};
  const auto o = neighborhood_overlap(4, e);
  EXPECT_DOUBLE_EQ(o[0], 1.0);
  EXPECT_DOUBLE_EQ(o[1], 0.5);
  EXPECT_EQ(o[3], 0.0);
}

TEST(RapidRetweets, WeightTwoRuleAndSelfLoops) {
  std::vector<ActionEvent> ev{repost("a", 10, "src", 0, "1"), post("src", 0, "hashtag", "#x", "p")};
  EXPECT_TRUE(rapid_retweets(make_dataset(ev), 30).flagged.empty());
  ev.push_back(repost("a", 110, "src", 100, "2"));
  EXPECT_EQ(rapid_retweets(make_dataset(ev), 30).flagged, (std::set<std::string>{"a", "src"}));
  EXPECT_TRUE(rapid_retweets(make_dataset(ev), 5).flagged.empty());
  const std::vector<ActionEvent> self{repost("s", 1, "s", 0, "1"), repost("s", 2, "s", 0, "2")};
  EXPECT_TRUE(rapid_retweets(make_dataset(self), 30).flagged.empty());
}

TEST(RapidRetweets, MonotoneInInterval) {
  std::mt19937_64 rng(4);
  std::vector<ActionEvent> ev;
  for (int i = 0; i < 300; ++i) {
    const double src_t = static_cast<double>(rng() % 1000);
    ev.push_back(repost("u" + std::to_string(rng() % 12), src_t + static_cast<double>(rng() % 120),
                        "s" + std::to_string(rng() % 4), src_t, std::to_string(i)));
  }
  const auto d = make_dataset(ev);
  std::set<std::string> prev;
  for (double interval : {0.0, 5.0, 10.0, 20.0, 30.0, 60.0, 120.0}) {
    const auto f = rapid_retweets(d, interval).flagged;
    EXPECT_TRUE(std::includes(f.begin(), f.end(), prev.begin(), prev.end())) << interval;
    prev = f;
  }
  EXPECT_THROW(rapid_retweets(d, -1.0), ValidationError);
}

TEST(RapidRetweets, MissingFieldIsNamed) {
  auto e = repost("a", 10, "src", 0, "1");
  e.source_timestamp.reset();
  try {
    rapid_retweets(make_dataset({e}), 30);
    FAIL();
  } catch (const ValidationError& err) {
    EXPECT_NE(std::string(err.what()).find("source_timestamp"), std::string::npos);
  }
}

TEST(HashtagSequences, SameDaySameOrder) {
  auto tagged = [](const std::string& user, double t, std::vector<std::string> tags, const std::string& id) {
    std::vector<ActionEvent> out;
    for (const auto& tag : tags) out.push_back(post(user, t, "hashtag", tag, id));
    return out;
  };
  auto build = [&](std::vector<std::vector<ActionEvent>> parts) {
    std::vector<ActionEvent> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return make_dataset(all);
  };
  const std::vector<std::string> five{"#a", "#b", "#c", "#d", "#e"};
  EXPECT_EQ(hashtag_sequences(build({tagged("u", 10, five, "1"), tagged("v", 500, five, "2")})).flagged,
            (std::set<std::string>{"u", "v"}));
  // a different day
  EXPECT_TRUE(hashtag_sequences(build({tagged("u", 10, five, "1"), tagged("v", 86400 + 10, five, "2")})).flagged.empty());
  // below the distinct-hashtag threshold
  const std::vector<std::string> four{"#a", "#b", "#c", "#d"};
  EXPECT_TRUE(hashtag_sequences(build({tagged("u", 10, four, "1"), tagged("v", 20, four, "2")})).flagged.empty());
  // the order matters
  const std::vector<std::string> shuffled{"#b", "#a", "#c", "#d", "#e"};
  EXPECT_TRUE(hashtag_sequences(build({tagged("u", 10, five, "1"), tagged("v", 20, shuffled, "2")})).flagged.empty());
}

TEST(Sync, HandExample) {
  // windows at 0 (min(2,2)), 5 (min(1,2)) and 10/20 (u2 alone)
  const auto d = make_dataset({post("u1", 0, "hashtag", "#k", "1"), post("u1", 5, "hashtag", "#k", "2"),
                               post("u2", 10, "hashtag", "#k", "3"), post("u2", 20, "hashtag", "#k", "4"),
                               post("u3", 1000, "hashtag", "#k", "5")});
  const auto g = synchronized_graph(d, "hashtag", false);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].weight, 3.0);
  EXPECT_EQ(g.nodes, d.users);
}

TEST(Sync, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<ActionEvent> ev;
    for (int i = 0; i < 60; ++i)
      ev.push_back(post("u" + std::to_string(rng() % 8), static_cast<double>(rng() % 2000), "hashtag",
                        "#" + std::to_string(rng() % 4), std::to_string(i)));
    const auto d = make_dataset(ev);
    const auto g = synchronized_graph(d, "hashtag", false);
    const auto expected = sync_oracle(d, "hashtag", 300.0);
    ASSERT_EQ(g.edges.size(), expected.size());
    for (const auto& e : g.edges) EXPECT_EQ(e.weight, expected.at({g.nodes[e.u], g.nodes[e.v]}));
  }
}

TEST(Sync, FilteringKeepsUniformWeights) {
  // every pair co-acts exactly once: mean + std = 1, so nothing is removed
  const auto d = make_dataset({post("a", 0, "hashtag", "#k", "1"), post("b", 1, "hashtag", "#k", "2"),
                               post("c", 1000, "hashtag", "#j", "3"), post("d", 1001, "hashtag", "#j", "4")});
  EXPECT_EQ(synchronized_graph(d, "hashtag", true).edges.size(), 2u);
  const auto r = synchronized_actions(d, "hashtag", true);
  EXPECT_EQ(r.kind, DetectionResult::Kind::partition);
  EXPECT_EQ(r.partition.community_of("a"), r.partition.community_of("b"));
  EXPECT_NE(r.partition.community_of("a"), r.partition.community_of("c"));
}

TEST(Bloc, PauseSymbols) {
  EXPECT_EQ(bloc_pause(60), '\0');
  EXPECT_EQ(bloc_pause(61), '.');
  EXPECT_EQ(bloc_pause(3601), ':');
  EXPECT_EQ(bloc_pause(86401), ';');
  EXPECT_EQ(bloc_pause(8 * 86400), '~');
  EXPECT_EQ(bloc_pause(40 * 86400), '^');
  EXPECT_EQ(bloc_pause(400 * 86400), '|');
}

TEST(Bloc, BehaviorString) {
  auto h = post("u", 0, "hashtag", "#x", "p1");
  h.text = "hi #x";
  auto l = post("u", 0, "url", "e.org", "p1");
  const auto r = repost("u", 120, "other", 50, "p2");
  const auto self = repost("u", 150, "u", 0, "p3");
  EXPECT_EQ(bloc_string({h, l, r, self}), "THUt.rR");
}

TEST(Bloc, IdenticalBehaviorIsLinked) {
  std::vector<ActionEvent> ev;
  for (const std::string u : {"a", "b"})
    for (int i = 0; i < 5; ++i) ev.push_back(post(u, 1000.0 * i, "hashtag", "#" + std::to_string(i), u + std::to_string(i)));
  ev.push_back(post("c", 0, "url", "e.org", "c0"));
  ev.push_back(post("c", 90000, "mention", "@z", "c1"));
  const auto r = bloc_detector(make_dataset(ev));
  EXPECT_EQ(r.partition.community_of("a"), r.partition.community_of("b"));
  EXPECT_NE(r.partition.community_of("a"), r.partition.community_of("c"));
}

TEST(Baselines, DeterministicOnSimulations) {
  for (auto kind : {synth::Pattern::burst, synth::Pattern::alternating}) {
    const auto d = sim_dataset(kind, 3);
    for (const auto& name : baseline_names()) {
      const auto a = to_json(run_baseline(name, d, {{"seed", "7"}}));
      EXPECT_EQ(a, to_json(run_baseline(name, d, {{"seed", "7"}}))) << name;
    }
  }
  const auto d = sim_dataset(synth::Pattern::burst, 3);
  EXPECT_THROW(run_baseline("nope", d, {}), ValidationError);
  EXPECT_THROW(run_baseline("rapid_retweets", d, {{"interval", "ten"}}), ValidationError);
  EXPECT_THROW(run_baseline("synchronized_actions", d, {{"filtering", "maybe"}}), ValidationError);
}

TEST(Baselines, JsonRoundTrip) {
  const auto d = sim_dataset(synth::Pattern::burst, 1);
  for (const auto& name : baseline_names()) {
    const auto r = run_baseline(name, d, {});
    const auto back = detection_from_json(to_json(r));
    EXPECT_EQ(back.kind, r.kind);
    EXPECT_EQ(back.flagged, r.flagged);
    EXPECT_EQ(back.partition, r.partition);
    EXPECT_EQ(back.method_name, r.method_name);
    EXPECT_EQ(back.parameters, r.parameters);
  }
  EXPECT_THROW(detection_from_json("{"), ParseError);
  EXPECT_THROW(detection_from_json(R"({"method":"x","kind":"other"})"), ValidationError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "coordnet/error.hpp"
#include "coordnet/layers.hpp"
#include "oracles.hpp"

using namespace coordnet;

namespace {

ActionEvent ev(std::string user, double t, std::string content, std::string type = "hashtag") {
  ActionEvent e;
  e.user = std::move(user);
  e.timestamp = t;
  e.action_type = std::move(type);
  e.content = std::move(content);
  return e;
}

struct Instance {
  Dataset d;
  ActionIndex index;
};

Instance random_instance(std::mt19937_64& rng, std::size_t max_users, std::size_t max_events, double span) {
  std::uniform_int_distribution<std::size_t> nu(2, max_users), ne(1, max_events), nk(1, 6);
  const auto users = nu(rng), events = ne(rng), keys = nk(rng);
  std::uniform_int_distribution<std::size_t> pick_u(0, users - 1), pick_k(0, keys - 1);
  std::uniform_int_distribution<int> t(0, static_cast<int>(span));
  std::vector<ActionEvent> out;
  for (std::size_t i = 0; i < events; ++i)
    out.push_back(ev("u" + std::to_string(pick_u(rng)), t(rng), "k" + std::to_string(pick_k(rng))));
  Instance inst;
  inst.d = make_dataset(out);
  inst.index = build_action_index(inst.d, "hashtag");
  return inst;
}

}  // namespace

TEST(Layers, SingleLagAtZeroBetaIsHalf) {
  // n_k = 3, u and v each act once; only the direction u -> v has a lag
  const auto d = make_dataset({ev("u", 10, "#a"), ev("v", 20, "#a"), ev("w", 5, "#a")});
  const auto g = build_layer(build_action_index(d, "hashtag"), 0.0, d.users);
  // u->v gives one lag, v->u none: weight 1 / (3 - 1)
  EXPECT_DOUBLE_EQ(g.weight("u", "v"), 0.5);
}

TEST(Layers, MinuteExampleWeight) {
  const auto d = make_dataset({ev("john", 355 * 60, "#x"), ev("john", 360 * 60, "#x"), ev("john", 375 * 60, "#x"),
                               ev("joe", 362 * 60, "#x")});
  const auto g = build_layer(build_action_index(d, "hashtag"), 0.1 / 60.0, d.users);
  const double expected = std::exp(-0.2) + std::exp(-0.7) + std::exp(-1.3);
  EXPECT_NEAR(g.weight("john", "joe"), expected, 1e-12);
  EXPECT_NEAR(expected, 1.5878, 1e-4);
}

TEST(Layers, ZeroBetaSingleActionsReduceToCoMembershipCounts) {
  // every user acts at most once per key: each co-member pair gets 1/(n_k-1)
  // from the single forward lag, so w_uv = sum_k 1/(n_k - 1)
  const auto d = make_dataset({ev("a", 1, "k1"), ev("b", 2, "k1"), ev("c", 3, "k1"), ev("a", 4, "k2"),
                               ev("b", 5, "k2")});
  const auto g = build_layer(build_action_index(d, "hashtag"), 0.0, d.users);
  EXPECT_DOUBLE_EQ(g.weight("a", "b"), 0.5 + 1.0);
  EXPECT_DOUBLE_EQ(g.weight("a", "c"), 0.5);
  EXPECT_DOUBLE_EQ(g.weight("b", "c"), 0.5);
}

TEST(Layers, IsolatesStayInTheUniverse) {
  const auto d = make_dataset({ev("a", 1, "k1"), ev("b", 2, "k1"), ev("z", 3, "k9")});
  const auto g = build_layer(build_action_index(d, "hashtag"), 0.0, d.users);
  EXPECT_EQ(g.nodes, d.users);
  EXPECT_EQ(g.edges.size(), 1u);
  EXPECT_THROW(build_layer(build_action_index(d, "hashtag"), 0.0, {"a", "b"}), ContractViolation);
}

TEST(Layers, PopularContentDiscount) {
  std::vector<ActionEvent> base{ev("u", 0, "k"), ev("v", 30, "k")};
  const auto g2 = build_layer(build_action_index(make_dataset(base), "hashtag"), 0.01, {"u", "v", "w", "x"});
  base.push_back(ev("w", 5000, "k"));
  base.push_back(ev("x", 6000, "k"));
  const auto d4 = make_dataset(base);
  // only lags involving w and x change; u->v stays the first subsequent lag
  LayerOptions exact;
  exact.truncate = false;
  const auto g4 = build_layer(build_action_index(d4, "hashtag"), 0.01, d4.users, exact);
  // contribution of the (u, v) lag scales by (2 - 1) / (4 - 1)
  const double uv_lag = std::exp(-0.01 * 30);
  EXPECT_NEAR(g2.weight("u", "v"), uv_lag, 1e-15);
  EXPECT_NEAR(g4.weight("u", "v"), uv_lag / 3.0, 1e-15);
}

TEST(Layers, MatchesQuadraticOracle) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = random_instance(rng, 20, 100, 500);
    const double beta = std::pow(10.0, std::uniform_real_distribution<double>(-4, 0)(rng));
    const double eps = 1e-6;
    const auto g = build_layer(inst.index, beta, inst.d.users);
    const auto ref = oracle::eq2_weights(inst.d.events, "hashtag", beta, *truncation_bound(beta, eps));
    std::size_t nonzero = 0;
    for (const auto& [pair, w] : ref) {
      if (w.kept > 0.0) ++nonzero;
      const double got = g.weight(pair.first, pair.second);
      EXPECT_NEAR(got, w.kept, 1e-12 * std::max(1.0, w.kept)) << pair.first << "-" << pair.second;
      EXPECT_LE(std::abs(got - w.weight), eps * static_cast<double>(w.omitted) + 1e-12);
    }
    EXPECT_EQ(g.edges.size(), nonzero);
  }
}

TEST(Layers, MaxMultiplicityMatchesItsDefinition) {
  std::mt19937_64 rng(5);
  LayerOptions opt;
  opt.union_mode = UnionMode::max_multiplicity;
  opt.truncate = false;
  const double beta = 0.05;
  for (int rep = 0; rep < 50; ++rep) {
    const auto inst = random_instance(rng, 8, 40, 50);
    const auto g = build_layer(inst.index, beta, inst.d.users, opt);
    std::map<std::pair<std::string, std::string>, double> expected;
    for (const auto& c : inst.index.contents) {
      if (c.participants() < 2) continue;
      const double norm = static_cast<double>(c.participants() - 1);
      for (std::size_t a = 0; a < c.users.size(); ++a)
        for (std::size_t b = a + 1; b < c.users.size(); ++b) {
          std::map<double, std::pair<int, int>> mult;
          for (double dt : oracle::directed_lags(c.users[a].times, c.users[b].times)) ++mult[dt].first;
          for (double dt : oracle::directed_lags(c.users[b].times, c.users[a].times)) ++mult[dt].second;
          double w = 0.0;
          for (const auto& [dt, m] : mult) w += std::max(m.first, m.second) * std::exp(-beta * dt);
          expected[{c.users[a].user, c.users[b].user}] += w / norm;
        }
    }
    for (const auto& [pair, w] : expected) EXPECT_NEAR(g.weight(pair.first, pair.second), w, 1e-12);
  }
}

TEST(Layers, TruncationErrorIsBounded) {
  std::mt19937_64 rng(17);
  LayerOptions exact;
  exact.truncate = false;
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_instance(rng, 10, 50, 100);
    for (double beta : {0.1, 1.0, 10.0}) {
      const auto cut = build_layer(inst.index, beta, inst.d.users);
      const auto full = build_layer(inst.index, beta, inst.d.users, exact);
      const auto ref = oracle::eq2_weights(inst.d.events, "hashtag", beta, *truncation_bound(beta, 1e-6));
      for (const auto& [pair, w] : ref) {
        const double diff = std::abs(cut.weight(pair.first, pair.second) - full.weight(pair.first, pair.second));
        EXPECT_LE(diff, 1e-6 * static_cast<double>(w.omitted) + 1e-15);
      }
    }
  }
}

TEST(Layers, WeightsAreNonIncreasingInBeta) {
  std::mt19937_64 rng(23);
  LayerOptions exact;
  exact.truncate = false;
  const auto inst = random_instance(rng, 12, 80, 300);
  LayerGraph prev = build_layer(inst.index, 0.0, inst.d.users, exact);
  for (double beta = 0.001; beta < 1.0; beta *= 2) {
    const auto g = build_layer(inst.index, beta, inst.d.users, exact);
    for (const auto& e : prev.edges) EXPECT_LE(g.weight(e.u, e.v), e.weight * (1 + 1e-15));
    prev = g;
  }
}

TEST(Layers, ThreadCountDoesNotChangeTheResult) {
  std::mt19937_64 rng(29);
  const auto inst = random_instance(rng, 20, 100, 200);
  LayerOptions one, four;
  four.threads = 4;
  const auto a = build_layer(inst.index, 0.02, inst.d.users, one);
  const auto b = build_layer(inst.index, 0.02, inst.d.users, four);
  EXPECT_EQ(a.edges, b.edges);
}

TEST(Layers, EdgeCsvRoundTripIsExact) {
  std::mt19937_64 rng(31);
  const auto inst = random_instance(rng, 15, 80, 300);
  const auto g = build_layer(inst.index, 0.0123, inst.d.users);
  std::stringstream s;
  write_edge_csv(s, g);
  const auto back = read_edge_csv(s, g.nodes, g.action_type, g.beta);
  EXPECT_EQ(back.edges, g.edges);
  std::stringstream bad("u,v,weight\nu0,nobody,1\n");
  EXPECT_THROW(read_edge_csv(bad, g.nodes, "x", 0.0), ValidationError);
}

TEST(Layers, GraphMlMentionsEveryNodeAndEdge) {
  const auto d = make_dataset({ev("a", 1, "k1"), ev("b", 2, "k1"), ev("c", 3, "k2")});
  const auto g = build_layer(build_action_index(d, "hashtag"), 0.0, d.users);
  std::ostringstream out;
  write_graphml(out, g);
  const auto xml = out.str();
  EXPECT_NE(xml.find("<graphml"), std::string::npos);
  EXPECT_NE(xml.find("\"c\""), std::string::npos);
  EXPECT_NE(xml.find("<edge"), std::string::npos);
}

TEST(Sweep, GridHelpers) {
  const auto grid = make_grid(0.0, 10.0, 0.01);
  EXPECT_EQ(grid.size(), 1001u);
  EXPECT_DOUBLE_EQ(grid.back(), 10.0);
  EXPECT_EQ(make_grid(2.0, 2.0, 0.5), std::vector<double>{2.0});
  EXPECT_THROW(make_grid(-1.0, 1.0, 0.1), ValidationError);
  EXPECT_THROW(make_grid(0.0, 1.0, 0.0), ValidationError);
}

TEST(Sweep, SingletonGrid) {
  std::mt19937_64 rng(37);
  const auto inst = random_instance(rng, 10, 60, 100);
  const std::vector<double> grid{0.0};
  const auto r = tune_beta(inst.index, grid, inst.d.users);
  EXPECT_EQ(r.beta_star, 0.0);
  EXPECT_EQ(r.q_curve.size(), 1u);
  EXPECT_EQ(r.q_star, r.q_curve[0]);
}

TEST(Sweep, SimultaneousCoActionsGiveAFlatCurve) {
  const auto d = make_dataset({ev("a", 10, "k1"), ev("b", 10, "k1"), ev("c", 50, "k2"), ev("d", 50, "k2"),
                               ev("e", 90, "k3"), ev("f", 90, "k3"), ev("a", 200, "k4"), ev("c", 200, "k4")});
  const auto grid = make_grid(0.0, 2.0, 0.25);
  const auto r = tune_beta(build_action_index(d, "hashtag"), grid, d.users);
  for (double q : r.q_curve) EXPECT_DOUBLE_EQ(q, r.q_curve.front());
  EXPECT_EQ(r.beta_star, 0.0);
}

TEST(Sweep, EmptyLayersScoreMinusInfinityAndAreNeverChosen) {
  // the only lag is 100 s; beyond beta = ln(1e6)/100 it is truncated away
  const auto d = make_dataset({ev("a", 0, "k"), ev("b", 100, "k")});
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto r = tune_beta(build_action_index(d, "hashtag"), grid, d.users);
  EXPECT_TRUE(std::isfinite(r.q_curve[0]));
  EXPECT_TRUE(std::isinf(r.q_curve[1]) && r.q_curve[1] < 0);
  EXPECT_EQ(r.beta_star, 0.0);
  const std::vector<double> late{0.5, 1.0};
  EXPECT_THROW(tune_beta(build_action_index(d, "hashtag"), late, d.users), UndefinedResult);
}

TEST(Sweep, NoSharedContentIsUndefined) {
  const auto d = make_dataset({ev("a", 0, "k1"), ev("b", 100, "k2")});
  const std::vector<double> grid{0.0, 1.0};
  EXPECT_THROW(tune_beta(build_action_index(d, "hashtag"), grid, d.users), UndefinedResult);
  const std::vector<double> empty;
  EXPECT_THROW(sweep_beta([&](double) { return LayerGraph{}; }, empty), ContractViolation);
  const std::vector<double> unsorted{1.0, 0.5};
  EXPECT_THROW(sweep_beta([&](double) { return LayerGraph{}; }, unsorted), ContractViolation);
}

TEST(Sweep, TimeUnitScalesTheGrid) {
  std::mt19937_64 rng(41);
  const auto inst = random_instance(rng, 10, 60, 3000);
  const std::vector<double> per_minute{0.0, 0.5, 1.0};
  const std::vector<double> per_second{0.0, 0.5 / 60, 1.0 / 60};
  TuneOptions minutes;
  minutes.time_unit_seconds = 60.0;
  const auto a = tune_beta(inst.index, per_minute, inst.d.users, minutes);
  const auto b = tune_beta(inst.index, per_second, inst.d.users);
  EXPECT_EQ(a.star_index, b.star_index);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.q_curve[i], b.q_curve[i], 1e-12);
}

TEST(Sweep, ParametricExampleHasAnInteriorPeak) {
  std::ifstream in(COORDNET_DATA_DIR "/parametric_example.csv");
  ASSERT_TRUE(in);
  const auto edges = read_parametric_edges(in);
  ASSERT_EQ(edges.size(), 18u);
  const auto grid = make_grid(0.0, 10.0, 0.01);
  const auto r = sweep_beta([&](double b) { return parametric_layer(edges, b); }, grid);
  EXPECT_GT(r.q_star, r.q_curve.front());
  EXPECT_GT(r.q_star, r.q_curve.back());
  EXPECT_DOUBLE_EQ(r.beta_star, 0.99);  // frozen regression value
  const auto g = parametric_layer(edges, r.beta_star);
  for (const auto& hi : edges)
    for (const auto& lo : edges)
      if (hi.multiplier >= 5.0 && lo.multiplier <= 1.2) {
        EXPECT_LT(g.weight(hi.u, hi.v), g.weight(lo.u, lo.v));
      }
}

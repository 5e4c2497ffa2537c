#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "coordnet/error.hpp"
#include "coordnet/synth.hpp"

using namespace coordnet;
using namespace coordnet::synth;

namespace {

const std::vector<Pattern> kAll{Pattern::burst, Pattern::intermittent, Pattern::alternating};

std::set<std::string> users_in(const Simulation& s, const Window& w) {
  std::set<std::string> out;
  for (const auto& e : s.events)
    if (e.timestamp >= w.start && e.timestamp <= w.end) out.insert(e.user);
  return out;
}

}  // namespace

TEST(Synth, BackgroundShape) {
  SimulationConfig cfg;
  const auto bg = generate_background(cfg, 1);
  ASSERT_EQ(bg.events.size(), 1000u);
  EXPECT_TRUE(bg.windows.empty());
  EXPECT_EQ(bg.truth.labels.size(), 40u);
  EXPECT_EQ(bg.truth.positives(), 0u);
  for (const auto& e : bg.events) {
    EXPECT_GE(e.timestamp, 0.0);
    EXPECT_LE(e.timestamp, cfg.horizon_seconds);
    EXPECT_TRUE(bg.truth.labels.count(e.user)) << e.user;
    EXPECT_NE(std::find(cfg.action_types.begin(), cfg.action_types.end(), e.action_type), cfg.action_types.end());
  }
}

TEST(Synth, Deterministic) {
  SimulationConfig cfg;
  EXPECT_EQ(generate_background(cfg, 9).events, generate_background(cfg, 9).events);
  EXPECT_NE(generate_background(cfg, 9).events, generate_background(cfg, 10).events);
  for (auto k : kAll) EXPECT_EQ(simulate(k, cfg).dataset.events, simulate(k, cfg).dataset.events);
}

TEST(Synth, ZeroHorizon) {
  SimulationConfig cfg;
  cfg.horizon_seconds = 0.0;
  for (const auto& e : generate_background(cfg, 1).events) EXPECT_EQ(e.timestamp, 0.0);
  for (const auto& e : generate_pattern(Pattern::burst, cfg, 1).events) EXPECT_EQ(e.timestamp, 0.0);
}

TEST(Synth, CatalogDealsTypesRoundRobin) {
  SimulationConfig cfg;
  const auto cat = make_catalog(cfg, 3);
  ASSERT_EQ(cat.size(), 20u);
  std::map<std::string, int> per_type;
  for (const auto& c : cat) {
    ++per_type[c.action_type];
    EXPECT_GE(c.popularity, 1.0);
    EXPECT_EQ(c.popularity, std::round(c.popularity));
  }
  EXPECT_EQ(per_type, (std::map<std::string, int>{{"hashtag", 7}, {"mention", 7}, {"url", 6}}));
}

TEST(Synth, PatternBudgetAndWindows) {
  SimulationConfig cfg;
  for (std::uint64_t seed = 1; seed <= 25; ++seed)
    for (auto k : kAll) {
      const auto p = generate_pattern(k, cfg, seed);
      EXPECT_GE(p.events.size(), 15u);
      EXPECT_LE(p.events.size(), 20u);
      EXPECT_EQ(p.truth.positives(), 6u);
      const std::size_t expected_windows = k == Pattern::burst ? 1 : k == Pattern::intermittent ? 2 : 4;
      ASSERT_EQ(p.windows.size(), expected_windows);
      for (std::size_t w = 0; w < p.windows.size(); ++w) {
        EXPECT_GE(p.windows[w].start, 0.0);
        EXPECT_LE(p.windows[w].end, cfg.horizon_seconds);
        if (w) {
          EXPECT_LE(p.windows[w - 1].end, p.windows[w].start);
        }
      }
      for (const auto& e : p.events) {
        const bool inside = std::any_of(p.windows.begin(), p.windows.end(), [&](const Window& w) {
          return e.timestamp >= w.start && e.timestamp <= w.end;
        });
        EXPECT_TRUE(inside);
      }
    }
}

TEST(Synth, BurstPutsEveryoneInOneWindow) {
  SimulationConfig cfg;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = generate_pattern(Pattern::burst, cfg, seed);
    EXPECT_EQ(users_in(p, p.windows[0]).size(), 6u);
    // count / rate minutes long
    EXPECT_NEAR(p.windows[0].end - p.windows[0].start, static_cast<double>(p.events.size()) / 1.3 * 60.0, 1e-9);
  }
}

TEST(Synth, IntermittentKeepsEveryoneActiveInEachWindow) {
  SimulationConfig cfg;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = generate_pattern(Pattern::intermittent, cfg, seed);
    for (const auto& w : p.windows) EXPECT_EQ(users_in(p, w).size(), 6u);
  }
}

TEST(Synth, AlternatingSilencesHalfTheGroup) {
  SimulationConfig cfg;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = generate_pattern(Pattern::alternating, cfg, seed);
    std::set<std::string> ever;
    bool someone_silent = false;
    for (const auto& w : p.windows) {
      const auto in = users_in(p, w);
      EXPECT_EQ(in, std::set<std::string>(w.active.begin(), w.active.end()));
      someone_silent |= in.size() < 6;
      ever.insert(in.begin(), in.end());
    }
    EXPECT_TRUE(someone_silent);
    EXPECT_EQ(ever.size(), 6u);
  }
}

TEST(Synth, Assemble) {
  SimulationConfig cfg;
  const auto s = simulate(Pattern::alternating, cfg);
  EXPECT_EQ(s.dataset.users.size(), 46u);
  EXPECT_EQ(s.truth.labels.size(), 46u);
  EXPECT_EQ(s.truth.positives(), 6u);
  EXPECT_EQ(s.windows.size(), 4u);

  const auto bg = generate_background(cfg, 1);
  EXPECT_THROW(assemble(bg, bg, cfg.action_types), ValidationError);
}

TEST(Synth, Layers) {
  SimulationConfig cfg;
  const auto s = simulate_layers({Pattern::burst, Pattern::alternating}, cfg);
  EXPECT_EQ(s.dataset.action_types, (std::vector<std::string>{"sim1", "sim3"}));
  EXPECT_EQ(s.truth.positives(), 6u);
  EXPECT_EQ(s.dataset.events.size(), simulate_layers({Pattern::burst}, cfg).dataset.events.size() +
                                         simulate_layers({Pattern::alternating}, cfg).dataset.events.size());
  EXPECT_THROW(simulate_layers({}, cfg), ValidationError);
  EXPECT_THROW(simulate_layers({Pattern::burst, Pattern::burst}, cfg), ValidationError);
}

TEST(Synth, ParsePatternAndValidation) {
  EXPECT_EQ(parse_pattern("1"), Pattern::burst);
  EXPECT_EQ(parse_pattern("3"), Pattern::alternating);
  EXPECT_THROW(parse_pattern("4"), ValidationError);
  EXPECT_THROW(parse_pattern(""), ValidationError);

  SimulationConfig cfg;
  cfg.min_inauthentic_actions = 25;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.primary_probability = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.min_inauthentic_actions = 8;
  cfg.max_inauthentic_actions = 8;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Synth, RasterCsv) {
  std::ostringstream s;
  write_raster_csv(s, {generate_background(SimulationConfig{}, 1).events.front()});
  EXPECT_EQ(s.str().substr(0, 15), "user,timestamp\n");
}

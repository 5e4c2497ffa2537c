#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "coordnet/ingest.hpp"

namespace coordnet::synth {

enum class Pattern {
  burst = 1,        // one near-synchronous window shared by all inauthentic users
  intermittent = 2, // several windows separated by silence, everyone active in each
  alternating = 3,  // windows alternate between two halves of the group
};

struct SimulationConfig {
  std::size_t n_inauthentic = 6;
  std::size_t min_inauthentic_actions = 15;
  std::size_t max_inauthentic_actions = 20;
  std::size_t n_authentic = 40;
  std::size_t authentic_actions = 1000;
  double horizon_seconds = 7 * 86400.0;
  std::size_t n_contents = 20;
  std::vector<std::string> action_types{"hashtag", "mention", "url"};
  // Popularity of a content: Normal(low_mean, sd) with probability
  // low_weight, else Normal(high_mean, sd); rounded, redrawn while < 1.
  double popularity_low_mean = 3.0;
  double popularity_high_mean = 12.0;
  double popularity_sd = 1.0;
  double popularity_low_weight = 0.6;
  double primary_probability = 0.9;
  double burst_rate_per_minute = 1.3;
  double intermittent_rate_per_minute = 1.0;
  std::size_t intermittent_windows = 2;
  std::vector<double> alternating_rates_per_minute{1.0, 1.2, 1.3, 1.5};
  std::uint64_t seed = 1;

  /// ValidationError on non-positive counts, probabilities outside [0,1],
  /// a negative horizon or an inauthentic action budget that cannot keep
  /// every user active in each of its windows.
  void validate() const;
};

struct Content {
  std::string key;
  std::string action_type;
  double popularity = 0.0;
};

/// Content catalog shared by background and pattern of one seed: contents
/// are dealt round-robin over action types, then shuffled.
std::vector<Content> make_catalog(const SimulationConfig& cfg, std::uint64_t seed);

struct Window {
  double start = 0.0;
  double end = 0.0;
  double rate_per_minute = 0.0;
  std::vector<std::string> active;
};

struct Simulation {
  std::vector<ActionEvent> events;
  GroundTruth truth;
  std::vector<Window> windows;  // empty for background
};

std::string authentic_user(std::size_t i, const SimulationConfig& cfg);
std::string inauthentic_user(std::size_t i);

/// Uniform timestamps over the horizon, uniform users, contents drawn in
/// proportion to popularity. Users are labeled authentic.
Simulation generate_background(const SimulationConfig& cfg, std::uint64_t seed);

/// Inauthentic activity of the given pattern. Windows are placed uniformly
/// in the horizon without overlap; events inside a window are uniform in it
/// and the window length is count / rate.
Simulation generate_pattern(Pattern kind, const SimulationConfig& cfg, std::uint64_t seed);

struct SimulatedDataset {
  Dataset dataset;
  GroundTruth truth;
  std::vector<Window> windows;
};

/// Merges both parts. ValidationError if they share a user id.
SimulatedDataset assemble(const Simulation& background, const Simulation& pattern,
                          const std::vector<std::string>& action_types);

/// background + pattern of `kind`, both from cfg.seed.
SimulatedDataset simulate(Pattern kind, const SimulationConfig& cfg);

/// Parses "1", "2", "3". ValidationError otherwise.
Pattern parse_pattern(const std::string& s);

/// One simulation per kind, each with its own seed derived from cfg.seed,
/// sharing user ids. All events of simulation `kind` get action type
/// "sim<kind>", so each simulation becomes one layer.
SimulatedDataset simulate_layers(const std::vector<Pattern>& kinds, const SimulationConfig& cfg);

/// CSV `user,timestamp` for raster plots.
void write_raster_csv(std::ostream& out, const std::vector<ActionEvent>& events);

}  // namespace coordnet::synth

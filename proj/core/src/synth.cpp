#include "coordnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "coordnet/rng.hpp"

namespace coordnet::synth {

namespace {

enum Stream : std::uint64_t { kCatalog = 1, kBackground = 2, kPattern = 3, kLayer = 4 };

double normal(Rng& rng, double mean, double sd) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string padded(std::size_t i, std::size_t n) {
  const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
  auto s = std::to_string(i);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::string text_for(const std::string& action_type, const std::string& content) {
  if (action_type == "hashtag") return "#" + content;
  if (action_type == "mention") return "@" + content;
  if (action_type == "url") return "https://example.org/" + content;
  return content;
}

ActionEvent make_event(const std::string& user, double t, const Content& c, const std::string& post_id) {
  ActionEvent e;
  e.user = user;
  e.timestamp = t;
  e.action_type = c.action_type;
  e.content = c.key;
  e.post_id = post_id;
  e.text = text_for(c.action_type, c.key);
  return e;
}

// Start times of windows with the given lengths, in this order, uniform over
// non-overlapping placements inside [0, horizon].
std::vector<double> place_windows(const std::vector<double>& lengths, double horizon, Rng& rng) {
  double total = 0.0;
  for (double l : lengths) total += l;
  const double slack = std::max(0.0, horizon - total);
  std::vector<double> cuts(lengths.size());
  for (auto& c : cuts) c = uniform01(rng) * slack;
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> starts(lengths.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    starts[i] = cuts[i] + offset;
    offset += lengths[i];
  }
  return starts;
}

// Split `total` into `parts` near-equal counts.
std::vector<std::size_t> split(std::size_t total, std::size_t parts) {
  std::vector<std::size_t> out(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++out[i];
  return out;
}

}  // namespace

void SimulationConfig::validate() const {
  if (n_inauthentic == 0 || n_authentic == 0 || n_contents == 0 || action_types.empty())
    throw ValidationError("simulation counts must be positive");
  if (min_inauthentic_actions == 0 || min_inauthentic_actions > max_inauthentic_actions)
    throw ValidationError("inauthentic action range must satisfy 0 < min <= max");
  if (!(horizon_seconds >= 0.0)) throw ValidationError("horizon must be >= 0");
  if (!(popularity_sd >= 0.0)) throw ValidationError("popularity sd must be >= 0");
  for (double p : {popularity_low_weight, primary_probability})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
  if (intermittent_windows < 2) throw ValidationError("intermittent pattern needs at least 2 windows");
  if (alternating_rates_per_minute.size() < 2) throw ValidationError("alternating pattern needs at least 2 windows");
  if (n_inauthentic < 2) throw ValidationError("alternating pattern needs at least 2 inauthentic users");
  for (double r : alternating_rates_per_minute)
    if (!(r > 0.0)) throw ValidationError("rates must be > 0");
  if (!(burst_rate_per_minute > 0.0) || !(intermittent_rate_per_minute > 0.0))
    throw ValidationError("rates must be > 0");
  if (min_inauthentic_actions < intermittent_windows * n_inauthentic)
    throw ValidationError("too few inauthentic actions to keep every user active in every window");
  const std::size_t half = (n_inauthentic + 1) / 2;
  if (min_inauthentic_actions < alternating_rates_per_minute.size() * half)
    throw ValidationError("too few inauthentic actions for the alternating windows");
}

std::string authentic_user(std::size_t i, const SimulationConfig& cfg) { return "auth_" + padded(i, cfg.n_authentic); }
std::string inauthentic_user(std::size_t i) { return "inauth_" + std::to_string(i); }

std::vector<Content> make_catalog(const SimulationConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kCatalog}));
  std::vector<Content> catalog(cfg.n_contents);
  std::vector<std::string> types(cfg.n_contents);
  for (std::size_t i = 0; i < cfg.n_contents; ++i) types[i] = cfg.action_types[i % cfg.action_types.size()];
  shuffle(types.begin(), types.end(), rng);
  for (std::size_t i = 0; i < cfg.n_contents; ++i) {
    catalog[i].key = "c" + padded(i, cfg.n_contents);
    catalog[i].action_type = types[i];
    double pop = 0.0;
    do {
      const bool low = uniform01(rng) < cfg.popularity_low_weight;
      pop = std::round(normal(rng, low ? cfg.popularity_low_mean : cfg.popularity_high_mean, cfg.popularity_sd));
    } while (pop < 1.0);
    catalog[i].popularity = pop;
  }
  return catalog;
}

Simulation generate_background(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto catalog = make_catalog(cfg, seed);
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : catalog) cumulative.push_back(acc += c.popularity);

  Rng rng(derive_seed(seed, {kBackground}));
  Simulation sim;
  for (std::size_t i = 0; i < cfg.n_authentic; ++i) sim.truth.labels[authentic_user(i, cfg)] = Label::authentic;
  for (std::size_t i = 0; i < cfg.authentic_actions; ++i) {
    const double t = uniform01(rng) * cfg.horizon_seconds;
    const auto user = authentic_user(uniform_index(rng, cfg.n_authentic), cfg);
    const double r = uniform01(rng) * acc;
    const auto k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin()),
        catalog.size() - 1);
    sim.events.push_back(make_event(user, t, catalog[k], "b" + std::to_string(i)));
  }
  return sim;
}

Simulation generate_pattern(Pattern kind, const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto catalog = make_catalog(cfg, seed);
  Rng rng(derive_seed(seed, {kPattern, static_cast<std::uint64_t>(kind)}));

  // Group-level ordered action list per modality: primary first.
  std::vector<std::vector<std::size_t>> group_actions(cfg.action_types.size());
  for (std::size_t a = 0; a < cfg.action_types.size(); ++a) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < catalog.size(); ++i)
      if (catalog[i].action_type == cfg.action_types[a]) pool.push_back(i);
    shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(pool.size(), 3));
    group_actions[a] = pool;
  }
  // Each user keeps the first 1, 2 or 3 of them (mean 2).
  std::vector<std::vector<std::vector<std::size_t>>> user_actions(cfg.n_inauthentic);
  for (auto& per_type : user_actions) {
    per_type.resize(cfg.action_types.size());
    for (std::size_t a = 0; a < cfg.action_types.size(); ++a) {
      const auto count = std::min<std::size_t>(1 + uniform_index(rng, 3), group_actions[a].size());
      per_type[a].assign(group_actions[a].begin(), group_actions[a].begin() + static_cast<std::ptrdiff_t>(count));
    }
  }

  const auto total = cfg.min_inauthentic_actions +
                     uniform_index(rng, cfg.max_inauthentic_actions - cfg.min_inauthentic_actions + 1);
  std::vector<std::size_t> everyone(cfg.n_inauthentic);
  for (std::size_t i = 0; i < everyone.size(); ++i) everyone[i] = i;

  std::vector<double> rates;
  std::vector<std::vector<std::size_t>> active;
  switch (kind) {
    case Pattern::burst:
      rates = {cfg.burst_rate_per_minute};
      active = {everyone};
      break;
    case Pattern::intermittent:
      rates.assign(cfg.intermittent_windows, cfg.intermittent_rate_per_minute);
      active.assign(cfg.intermittent_windows, everyone);
      break;
    case Pattern::alternating: {
      const std::size_t half = (cfg.n_inauthentic + 1) / 2;
      const std::vector<std::size_t> a(everyone.begin(), everyone.begin() + static_cast<std::ptrdiff_t>(half));
      const std::vector<std::size_t> b(everyone.begin() + static_cast<std::ptrdiff_t>(half), everyone.end());
      rates = cfg.alternating_rates_per_minute;
      for (std::size_t w = 0; w < rates.size(); ++w) active.push_back(w % 2 == 0 ? a : b);
      break;
    }
    default:
      throw ValidationError("unknown pattern kind " + std::to_string(static_cast<int>(kind)));
  }

  const auto counts = split(total, rates.size());
  std::vector<double> lengths;
  for (std::size_t w = 0; w < rates.size(); ++w) lengths.push_back(static_cast<double>(counts[w]) / rates[w] * 60.0);
  const auto starts = place_windows(lengths, cfg.horizon_seconds, rng);

  Simulation sim;
  for (std::size_t i = 0; i < cfg.n_inauthentic; ++i) sim.truth.labels[inauthentic_user(i)] = Label::coordinated;
  std::size_t post = 0;
  for (std::size_t w = 0; w < rates.size(); ++w) {
    Window win;
    win.start = starts[w];
    win.end = std::min(starts[w] + lengths[w], cfg.horizon_seconds);
    win.rate_per_minute = rates[w];
    for (auto u : active[w]) win.active.push_back(inauthentic_user(u));

    // Every active user acts at least once; the rest of the window's budget
    // goes to uniformly chosen active users.
    std::vector<std::size_t> actors = active[w];
    while (actors.size() < counts[w]) actors.push_back(active[w][uniform_index(rng, active[w].size())]);
    shuffle(actors.begin(), actors.end(), rng);
    std::vector<double> times(counts[w]);
    for (auto& t : times) t = win.start + uniform01(rng) * (win.end - win.start);
    std::sort(times.begin(), times.end());

    for (std::size_t e = 0; e < counts[w]; ++e) {
      const auto u = actors[e];
      const auto a = uniform_index(rng, cfg.action_types.size());
      const auto& mine = user_actions[u][a];
      std::size_t pick = mine.front();
      if (mine.size() > 1 && uniform01(rng) >= cfg.primary_probability)
        pick = mine[1 + uniform_index(rng, mine.size() - 1)];
      sim.events.push_back(make_event(inauthentic_user(u), times[e], catalog[pick], "i" + std::to_string(post++)));
    }
    sim.windows.push_back(std::move(win));
  }
  return sim;
}

SimulatedDataset assemble(const Simulation& background, const Simulation& pattern,
                          const std::vector<std::string>& action_types) {
  for (const auto& [user, label] : pattern.truth.labels)
    if (background.truth.labels.count(user)) throw ValidationError("user '" + user + "' appears in both parts");
  std::set<std::string> pattern_users;
  for (const auto& e : pattern.events) pattern_users.insert(e.user);
  for (const auto& e : background.events)
    if (pattern_users.count(e.user)) throw ValidationError("user '" + e.user + "' appears in both parts");

  SimulatedDataset out;
  auto events = background.events;
  events.insert(events.end(), pattern.events.begin(), pattern.events.end());
  out.dataset = make_dataset(std::move(events), action_types);
  out.truth = background.truth;
  for (const auto& [user, label] : pattern.truth.labels) out.truth.labels[user] = label;
  out.windows = pattern.windows;
  return out;
}

SimulatedDataset simulate(Pattern kind, const SimulationConfig& cfg) {
  return assemble(generate_background(cfg, cfg.seed), generate_pattern(kind, cfg, cfg.seed), cfg.action_types);
}

Pattern parse_pattern(const std::string& s) {
  if (s == "1") return Pattern::burst;
  if (s == "2") return Pattern::intermittent;
  if (s == "3") return Pattern::alternating;
  throw ValidationError("unknown simulation kind '" + s + "' (expected 1, 2 or 3)");
}

SimulatedDataset simulate_layers(const std::vector<Pattern>& kinds, const SimulationConfig& cfg) {
  if (kinds.empty()) throw ValidationError("no simulation kinds given");
  std::vector<ActionEvent> events;
  std::vector<std::string> types;
  SimulatedDataset out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto name = "sim" + std::to_string(static_cast<int>(kinds[i]));
    if (std::find(types.begin(), types.end(), name) != types.end())
      throw ValidationError("simulation kind " + name + " listed twice");
    types.push_back(name);
    auto layer_cfg = cfg;
    layer_cfg.seed = derive_seed(cfg.seed, {kLayer, static_cast<std::uint64_t>(kinds[i])});
    auto sim = simulate(kinds[i], layer_cfg);
    for (auto e : sim.dataset.events) {
      e.action_type = name;
      e.post_id = name + ":" + e.post_id;
      events.push_back(std::move(e));
    }
    for (const auto& [user, label] : sim.truth.labels) out.truth.labels[user] = label;
    out.windows.insert(out.windows.end(), sim.windows.begin(), sim.windows.end());
  }
  out.dataset = make_dataset(std::move(events), types);
  return out;
}

void write_raster_csv(std::ostream& out, const std::vector<ActionEvent>& events) {
  csv::write_row(out, {"user", "timestamp"});
  for (const auto& e : events) csv::write_row(out, {e.user, csv::format_double(e.timestamp)});
}

}  // namespace coordnet::synth

#include "coordnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "json.hpp"

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"

namespace coordnet::baselines {

using nlohmann::json;

namespace {

std::unordered_map<std::string, NodeId> index_users(const std::vector<std::string>& users) {
  std::unordered_map<std::string, NodeId> id;
  for (std::size_t i = 0; i < users.size(); ++i) id.emplace(users[i], static_cast<NodeId>(i));
  return id;
}

DetectionResult flagged_result(std::string name, std::set<std::string> flagged,
                               std::map<std::string, std::string> parameters) {
  DetectionResult r;
  r.kind = DetectionResult::Kind::flagged_set;
  r.flagged = std::move(flagged);
  r.method_name = std::move(name);
  r.parameters = std::move(parameters);
  return r;
}

std::string fmt(double v) { return csv::format_double(v); }

// Original posts in time order: (key, author, time, events in input order).
struct Post {
  std::string key;
  std::string user;
  double timestamp = 0.0;
  std::vector<const ActionEvent*> events;
};

std::vector<Post> original_posts(const Dataset& d, const std::string& retweet_type) {
  std::vector<Post> posts;
  std::unordered_map<std::string, std::size_t> where;
  for (const auto& e : d.events) {
    if (is_repost(e, retweet_type)) continue;
    const auto key = post_key(e);
    auto [it, inserted] = where.emplace(key, posts.size());
    if (inserted) posts.push_back({key, e.user, e.timestamp, {}});
    posts[it->second].events.push_back(&e);
  }
  return posts;  // d.events is time sorted, so posts are ordered by first event
}

// Longest common substring of a[alo, ahi) and b[blo, bhi): longest, then
// smallest i, then smallest j.
struct Match {
  std::size_t i, j, k;
};

Match longest_match(const std::string& a, std::size_t alo, std::size_t ahi, const std::string& b, std::size_t blo,
                    std::size_t bhi) {
  Match best{alo, blo, 0};
  std::vector<std::size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t c = j - blo + 1;
      cur[c] = a[i] == b[j] ? prev[c - 1] + 1 : 0;
      if (cur[c] > best.k) best = {i + 1 - cur[c], j + 1 - cur[c], cur[c]};
    }
    std::swap(prev, cur);
  }
  return best;
}

std::size_t matched_chars(const std::string& a, std::size_t alo, std::size_t ahi, const std::string& b,
                          std::size_t blo, std::size_t bhi) {
  if (alo >= ahi || blo >= bhi) return 0;
  const auto m = longest_match(a, alo, ahi, b, blo, bhi);
  if (m.k == 0) return 0;
  return m.k + matched_chars(a, alo, m.i, b, blo, m.j) + matched_chars(a, m.i + m.k, ahi, b, m.j + m.k, bhi);
}

DetectionResult louvain_result(std::string name, const LayerGraph& g, std::uint64_t seed,
                               std::map<std::string, std::string> parameters) {
  DetectionResult r;
  r.kind = DetectionResult::Kind::partition;
  r.partition = detect_communities(g, {1.0, seed, Method::louvain});
  r.method_name = std::move(name);
  r.parameters = std::move(parameters);
  return r;
}

}  // namespace

bool is_repost(const ActionEvent& e, const std::string& retweet_type) {
  return e.action_type == retweet_type || !e.source_post.empty() || !e.source_user.empty();
}

std::string post_key(const ActionEvent& e) {
  return e.post_id.empty() ? e.user + "@" + csv::format_double(e.timestamp) : e.post_id;
}

std::string to_json(const DetectionResult& r) {
  json j;
  j["method"] = r.method_name;
  j["kind"] = r.kind == DetectionResult::Kind::flagged_set ? "flagged_set" : "partition";
  j["parameters"] = r.parameters;
  if (r.kind == DetectionResult::Kind::flagged_set) {
    j["flagged"] = std::vector<std::string>(r.flagged.begin(), r.flagged.end());
  } else {
    json members = json::object();
    for (std::size_t i = 0; i < r.partition.size(); ++i) members[r.partition.nodes()[i]] = r.partition.assignment()[i];
    j["partition"] = members;
    j["nodes"] = r.partition.nodes();
  }
  return j.dump(2) + "\n";
}

DetectionResult detection_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("detection result is not valid JSON: ") + e.what());
  }
  try {
    DetectionResult r;
    r.method_name = j.at("method").get<std::string>();
    r.parameters = j.value("parameters", std::map<std::string, std::string>{});
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "flagged_set") {
      r.kind = DetectionResult::Kind::flagged_set;
      for (const auto& u : j.at("flagged")) r.flagged.insert(u.get<std::string>());
    } else if (kind == "partition") {
      r.kind = DetectionResult::Kind::partition;
      auto nodes = j.at("nodes").get<std::vector<std::string>>();
      std::vector<std::uint64_t> labels;
      for (const auto& n : nodes) labels.push_back(j.at("partition").at(n).get<std::uint64_t>());
      r.partition = Partition::from_labels(std::move(nodes), labels);
    } else {
      throw ValidationError("unknown detection kind '" + kind + "'");
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed detection result: ") + e.what());
  }
}

DetectionResult hashtag_sequences(const Dataset& d, const HashtagSequenceOptions& options) {
  // day -> user -> (distinct hashtags, post sequences)
  struct Day {
    std::map<std::string, std::set<std::string>> distinct;
    std::map<std::string, std::vector<std::vector<std::string>>> sequences;
  };
  std::map<long long, Day> days;
  for (const auto& post : original_posts(d, options.retweet_type)) {
    std::vector<std::string> seq;
    for (const auto* e : post.events)
      if (e->action_type == options.hashtag_type) seq.push_back(e->content);
    if (seq.empty()) continue;
    auto& day = days[static_cast<long long>(std::floor(post.timestamp / options.day_seconds))];
    day.distinct[post.user].insert(seq.begin(), seq.end());
    day.sequences[post.user].push_back(std::move(seq));
  }

  std::set<std::string> flagged;
  for (const auto& [index, day] : days) {
    std::map<std::vector<std::string>, std::set<std::string>> by_sequence;
    for (const auto& [user, distinct] : day.distinct) {
      if (distinct.size() < options.min_distinct) continue;
      for (const auto& seq : day.sequences.at(user)) by_sequence[seq].insert(user);
    }
    // Users sharing a sequence are connected; every member of a component
    // of size >= 2 shares at least one sequence with someone.
    for (const auto& [seq, users] : by_sequence)
      if (users.size() >= 2) flagged.insert(users.begin(), users.end());
  }
  return flagged_result("hashtag_sequences", std::move(flagged),
                        {{"min_distinct", std::to_string(options.min_distinct)}, {"day_seconds", fmt(options.day_seconds)}});
}

DetectionResult rapid_retweets(const Dataset& d, double interval_seconds, const RapidRetweetOptions& options) {
  if (!(interval_seconds >= 0.0)) throw ValidationError("interval must be >= 0 seconds");
  std::map<std::pair<std::string, std::string>, std::size_t> weight;
  for (const auto& e : d.events) {
    if (e.action_type != options.retweet_type) continue;
    if (e.source_user.empty()) throw ValidationError("repost by '" + e.user + "' lacks field source_user");
    if (!e.source_timestamp) throw ValidationError("repost by '" + e.user + "' lacks field source_timestamp");
    const double lag = e.timestamp - *e.source_timestamp;
    if (lag < 0.0 || lag > interval_seconds || e.source_user == e.user) continue;
    ++weight[{e.user, e.source_user}];
  }
  std::set<std::string> flagged;
  for (const auto& [edge, w] : weight)
    if (w >= options.min_weight) {
      flagged.insert(edge.first);
      flagged.insert(edge.second);
    }
  return flagged_result("rapid_retweets", std::move(flagged),
                        {{"interval", fmt(interval_seconds)}, {"min_weight", std::to_string(options.min_weight)}});
}

double disparity_pvalue(double w, double strength, std::size_t degree) {
  if (degree <= 1 || !(strength > 0.0)) return 1.0;
  return std::pow(std::max(0.0, 1.0 - w / strength), static_cast<double>(degree - 1));
}

std::vector<WeightedEdge> disparity_filter(std::size_t node_count, const std::vector<WeightedEdge>& edges,
                                           double alpha) {
  std::vector<double> strength(node_count, 0.0);
  std::vector<std::size_t> degree(node_count, 0);
  for (const auto& e : edges) {
    strength[e.u] += e.weight;
    strength[e.v] += e.weight;
    ++degree[e.u];
    ++degree[e.v];
  }
  std::vector<WeightedEdge> kept;
  for (const auto& e : edges)
    if (disparity_pvalue(e.weight, strength[e.u], degree[e.u]) < alpha ||
        disparity_pvalue(e.weight, strength[e.v], degree[e.v]) < alpha)
      kept.push_back(e);
  return kept;
}

std::vector<double> neighborhood_overlap(std::size_t node_count, const std::vector<WeightedEdge>& edges) {
  std::vector<std::set<NodeId>> nbr(node_count);
  for (const auto& e : edges) {
    nbr[e.u].insert(e.v);
    nbr[e.v].insert(e.u);
  }
  std::vector<double> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    std::size_t common = 0;
    for (auto x : nbr[e.u])
      if (x != e.v && nbr[e.v].count(x)) ++common;
    const double denom = static_cast<double>(nbr[e.u].size() - 1) + static_cast<double>(nbr[e.v].size() - 1) -
                         static_cast<double>(common);
    out.push_back(denom > 0.0 ? static_cast<double>(common) / denom : 0.0);
  }
  return out;
}

DetectionResult coretweet_cardinality(const Dataset& d, const CoRetweetOptions& options) {
  const auto id = index_users(d.users);
  // window -> source post -> reposting users
  std::map<long long, std::map<std::string, std::set<NodeId>>> windows;
  for (const auto& e : d.events) {
    if (!is_repost(e, options.retweet_type) || e.source_post.empty()) continue;
    windows[static_cast<long long>(std::floor(e.timestamp / options.window_seconds))][e.source_post].insert(
        id.at(e.user));
  }
  std::set<std::string> flagged;
  for (const auto& [w, posts] : windows) {
    std::map<std::pair<NodeId, NodeId>, double> weight;
    for (const auto& [post, users] : posts) {
      const std::vector<NodeId> v(users.begin(), users.end());
      for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b) weight[{v[a], v[b]}] += 1.0;
    }
    std::vector<WeightedEdge> edges;
    for (const auto& [pair, wt] : weight) edges.push_back({pair.first, pair.second, wt});
    const auto backbone = disparity_filter(d.users.size(), edges, options.alpha);
    const auto overlap = neighborhood_overlap(d.users.size(), backbone);
    for (std::size_t i = 0; i < backbone.size(); ++i)
      if (overlap[i] >= options.min_overlap) {
        flagged.insert(d.users[backbone[i].u]);
        flagged.insert(d.users[backbone[i].v]);
      }
  }
  return flagged_result("coretweet_cardinality", std::move(flagged),
                        {{"alpha", fmt(options.alpha)},
                         {"min_overlap", fmt(options.min_overlap)},
                         {"window_seconds", fmt(options.window_seconds)}});
}

double ratcliff_obershelp_directed(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  return 2.0 * static_cast<double>(matched_chars(a, 0, a.size(), b, 0, b.size())) /
         static_cast<double>(a.size() + b.size());
}

double ratcliff_obershelp_similarity(const std::string& a, const std::string& b) {
  return std::max(ratcliff_obershelp_directed(a, b), ratcliff_obershelp_directed(b, a));
}

DetectionResult ratcliff_obershelp(const Dataset& d, const TextSimilarityOptions& options) {
  std::vector<std::pair<std::string, std::string>> timeline;  // (author, text)
  for (const auto& post : original_posts(d, options.retweet_type)) {
    std::string text;
    for (const auto* e : post.events)
      if (!e->text.empty()) {
        text = e->text;
        break;
      }
    if (!text.empty()) timeline.emplace_back(post.user, std::move(text));
  }
  std::set<std::string> flagged;
  for (std::size_t i = 0; i < timeline.size(); ++i)
    for (std::size_t j = i + 1; j < timeline.size() && j - i <= options.max_distance; ++j)
      if (ratcliff_obershelp_similarity(timeline[i].second, timeline[j].second) >= options.threshold) {
        flagged.insert(timeline[i].first);
        flagged.insert(timeline[j].first);
      }
  return flagged_result("ratcliff_obershelp", std::move(flagged),
                        {{"max_distance", std::to_string(options.max_distance)}, {"threshold", fmt(options.threshold)}});
}

LayerGraph synchronized_graph(const Dataset& d, const std::string& action_type, bool filtering,
                              const SyncOptions& options) {
  const auto id = index_users(d.users);
  std::vector<const ActionEvent*> events;
  for (const auto& e : d.events)
    if (e.action_type == action_type && !is_repost(e, options.retweet_type)) events.push_back(&e);

  std::map<std::pair<NodeId, NodeId>, double> weight;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < events.size(); ++lo) {
    if (lo > 0 && events[lo]->timestamp == events[lo - 1]->timestamp) continue;  // one window per distinct time
    const double end = events[lo]->timestamp + options.window_seconds;
    hi = std::max(hi, lo);
    while (hi < events.size() && events[hi]->timestamp < end) ++hi;
    std::map<std::string, std::map<NodeId, std::size_t>> counts;
    for (std::size_t i = lo; i < hi; ++i) ++counts[events[i]->content][id.at(events[i]->user)];
    for (const auto& [content, per_user] : counts) {
      const std::vector<std::pair<NodeId, std::size_t>> v(per_user.begin(), per_user.end());
      for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b)
          weight[{v[a].first, v[b].first}] += static_cast<double>(std::min(v[a].second, v[b].second));
    }
  }

  std::vector<WeightedEdge> edges;
  for (const auto& [pair, w] : weight) edges.push_back({pair.first, pair.second, w});
  if (filtering && !edges.empty()) {
    double mean = 0.0;
    for (const auto& e : edges) mean += e.weight;
    mean /= static_cast<double>(edges.size());
    double var = 0.0;
    for (const auto& e : edges) var += (e.weight - mean) * (e.weight - mean);
    const double threshold = std::ceil(mean + std::sqrt(var / static_cast<double>(edges.size())));
    std::erase_if(edges, [&](const WeightedEdge& e) { return e.weight < threshold; });
  }
  return LayerGraph::from_edges(d.users, std::move(edges), action_type, 0.0);
}

DetectionResult synchronized_actions(const Dataset& d, const std::string& action_type, bool filtering,
                                     const SyncOptions& options) {
  return louvain_result(filtering ? "synchronized_actions_filtered" : "synchronized_actions",
                        synchronized_graph(d, action_type, filtering, options), options.seed,
                        {{"action_type", action_type},
                         {"filtering", filtering ? "true" : "false"},
                         {"window_seconds", fmt(options.window_seconds)},
                         {"seed", std::to_string(options.seed)}});
}

char bloc_pause(double gap_seconds) {
  if (gap_seconds <= 60.0) return '\0';
  if (gap_seconds <= 3600.0) return '.';
  if (gap_seconds <= 86400.0) return ':';
  if (gap_seconds <= 7 * 86400.0) return ';';
  if (gap_seconds <= 30 * 86400.0) return '~';
  if (gap_seconds <= 365 * 86400.0) return '^';
  return '|';
}

std::string bloc_string(const std::vector<ActionEvent>& user_events, const BlocOptions& options) {
  std::vector<std::pair<double, std::string>> posts;  // (time, symbols)
  std::unordered_map<std::string, std::size_t> where;
  std::vector<std::set<char>> content;
  for (const auto& e : user_events) {
    auto [it, inserted] = where.emplace(post_key(e), posts.size());
    if (inserted) {
      char action = 'T';
      if (is_repost(e, options.retweet_type)) action = e.source_user == e.user ? 'R' : 'r';
      posts.emplace_back(e.timestamp, std::string(1, action));
      content.emplace_back();
    }
    auto& symbols = content[it->second];
    if (e.action_type == options.hashtag_type) symbols.insert('H');
    else if (e.action_type == options.url_type) symbols.insert('U');
    else if (e.action_type == options.mention_type) symbols.insert('m');
    if (!e.text.empty() && !is_repost(e, options.retweet_type)) symbols.insert('t');
  }
  std::vector<std::size_t> order(posts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return posts[a].first < posts[b].first; });
  std::string out;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const auto i = order[n];
    if (n > 0)
      if (const char p = bloc_pause(posts[i].first - posts[order[n - 1]].first)) out.push_back(p);
    out += posts[i].second;
    out.append(content[i].begin(), content[i].end());
  }
  return out;
}

DetectionResult bloc_detector(const Dataset& d, const BlocOptions& options) {
  std::map<std::string, std::vector<ActionEvent>> per_user;
  for (const auto& e : d.events) per_user[e.user].push_back(e);

  const std::size_t n = d.users.size();
  std::vector<std::map<std::string, double>> tf(n);
  std::map<std::string, std::size_t> df;
  for (std::size_t u = 0; u < n; ++u) {
    auto it = per_user.find(d.users[u]);
    if (it == per_user.end()) continue;
    const auto s = bloc_string(it->second, options);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) tf[u][s.substr(i, 2)] += 1.0;
    for (const auto& [gram, c] : tf[u]) ++df[gram];
  }
  std::vector<std::map<std::string, double>> vec(n);
  for (std::size_t u = 0; u < n; ++u) {
    double norm = 0.0;
    for (const auto& [gram, c] : tf[u]) {
      const double idf = std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(df[gram]))) + 1.0;
      const double x = c * idf;
      vec[u][gram] = x;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& [gram, x] : vec[u]) x /= norm;
  }
  std::vector<WeightedEdge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    if (vec[a].empty()) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (vec[b].empty()) continue;
      double dot = 0.0;
      const auto& small = vec[a].size() <= vec[b].size() ? vec[a] : vec[b];
      const auto& large = vec[a].size() <= vec[b].size() ? vec[b] : vec[a];
      for (const auto& [gram, x] : small)
        if (auto it = large.find(gram); it != large.end()) dot += x * it->second;
      if (dot >= options.threshold)
        edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b), std::min(dot, 1.0)});
    }
  }
  return louvain_result("bloc", LayerGraph::from_edges(d.users, std::move(edges), "bloc", 0.0), options.seed,
                        {{"threshold", fmt(options.threshold)}, {"seed", std::to_string(options.seed)}});
}

const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names{"hashtag_sequences",  "rapid_retweets",       "coretweet_cardinality",
                                              "ratcliff_obershelp", "synchronized_actions", "bloc"};
  return names;
}

namespace {

double number_param(const std::map<std::string, std::string>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("parameter " + key + " is not a number: '" + it->second + "'");
  }
}

bool bool_param(const std::map<std::string, std::string>& p, const std::string& key, bool fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ValidationError("parameter " + key + " must be true or false");
}

}  // namespace

DetectionResult run_baseline(const std::string& name, const Dataset& d,
                             const std::map<std::string, std::string>& parameters) {
  const auto seed = static_cast<std::uint64_t>(number_param(parameters, "seed", 0));
  if (name == "hashtag_sequences") return hashtag_sequences(d);
  if (name == "rapid_retweets") return rapid_retweets(d, number_param(parameters, "interval", 30));
  if (name == "coretweet_cardinality") return coretweet_cardinality(d);
  if (name == "ratcliff_obershelp") return ratcliff_obershelp(d);
  if (name == "synchronized_actions") {
    auto it = parameters.find("action_type");
    const std::string type = it != parameters.end() ? it->second : "hashtag";
    SyncOptions o;
    o.seed = seed;
    return synchronized_actions(d, type, bool_param(parameters, "filtering", false), o);
  }
  if (name == "bloc") {
    BlocOptions o;
    o.seed = seed;
    return bloc_detector(d, o);
  }
  throw ValidationError("unknown baseline '" + name + "'");
}

}  // namespace coordnet::baselines

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coordnet/community.hpp"
#include "coordnet/graph.hpp"
#include "coordnet/ingest.hpp"

namespace coordnet::baselines {

struct DetectionResult {
  enum class Kind { flagged_set, partition };
  Kind kind = Kind::flagged_set;
  std::set<std::string> flagged;  // kind == flagged_set
  Partition partition;            // kind == partition
  std::string method_name;
  std::map<std::string, std::string> parameters;
};

std::string to_json(const DetectionResult& r);
DetectionResult detection_from_json(const std::string& text);

/// Reposts are events of `retweet_type` or events naming a source post or
/// source user; everything else belongs to an original post.
bool is_repost(const ActionEvent& e, const std::string& retweet_type = "retweet");
/// post_id when present, else user + timestamp.
std::string post_key(const ActionEvent& e);

struct HashtagSequenceOptions {
  std::string hashtag_type = "hashtag";
  std::string retweet_type = "retweet";
  std::size_t min_distinct = 5;
  double day_seconds = 86400.0;
};

/// Per day, users with at least `min_distinct` distinct hashtags in original
/// posts are linked when they posted an identical ordered hashtag sequence;
/// every user in a non-trivial component is flagged.
DetectionResult hashtag_sequences(const Dataset& d, const HashtagSequenceOptions& options = {});

struct RapidRetweetOptions {
  std::string retweet_type = "retweet";
  std::size_t min_weight = 2;
};

/// Directed reposter -> source author edges counting reposts made within
/// `interval_seconds` of the original; self-loops dropped, weight >= 2 kept,
/// both endpoints flagged. ValidationError naming the missing field when a
/// repost lacks source_user or source_timestamp.
DetectionResult rapid_retweets(const Dataset& d, double interval_seconds, const RapidRetweetOptions& options = {});

/// Disparity-filter p-value of an edge of weight w at a node of strength s
/// and degree k: (1 - w/s)^(k-1); 1 for k <= 1.
double disparity_pvalue(double w, double strength, std::size_t degree);

/// Edges significant (p < alpha) at either endpoint.
std::vector<WeightedEdge> disparity_filter(std::size_t node_count, const std::vector<WeightedEdge>& edges, double alpha);

/// n_ij / ((k_i - 1) + (k_j - 1) - n_ij) with n_ij common neighbors; 0 when
/// the denominator is 0. One value per edge, in input order.
std::vector<double> neighborhood_overlap(std::size_t node_count, const std::vector<WeightedEdge>& edges);

struct CoRetweetOptions {
  std::string retweet_type = "retweet";
  double window_seconds = 7 * 86400.0;
  double alpha = 0.05;
  double min_overlap = 0.05;
};

/// Per window, co-repost graph weighted by the number of shared reposted
/// posts, reduced to its disparity backbone and then to edges with enough
/// neighborhood overlap; non-isolated nodes are flagged.
DetectionResult coretweet_cardinality(const Dataset& d, const CoRetweetOptions& options = {});

/// Gestalt pattern matching of a against b: 2M / (|a| + |b|) where M is the
/// number of characters in recursively matched longest common substrings
/// (leftmost in a, then leftmost in b). 1 for two empty strings.
double ratcliff_obershelp_directed(const std::string& a, const std::string& b);
/// max of both argument orders, which makes it symmetric.
double ratcliff_obershelp_similarity(const std::string& a, const std::string& b);

struct TextSimilarityOptions {
  std::string retweet_type = "retweet";
  std::size_t max_distance = 10;
  double threshold = 0.7;
};

/// Original posts sorted by time; posts at most `max_distance` positions
/// apart with similarity >= threshold are linked and their authors flagged.
DetectionResult ratcliff_obershelp(const Dataset& d, const TextSimilarityOptions& options = {});

struct SyncOptions {
  std::string retweet_type = "retweet";
  double window_seconds = 300.0;
  std::uint64_t seed = 0;
};

/// Windows [t, t + window) anchored at every distinct original-post time of
/// `action_type`; per window and content each pair gains min(count_u,
/// count_v). With `filtering`, edges below ceil(mean + std) are removed.
/// Louvain communities over all dataset users.
DetectionResult synchronized_actions(const Dataset& d, const std::string& action_type, bool filtering,
                                     const SyncOptions& options = {});

/// The graph synchronized_actions clusters (node order = d.users).
LayerGraph synchronized_graph(const Dataset& d, const std::string& action_type, bool filtering,
                              const SyncOptions& options = {});

struct BlocOptions {
  std::string retweet_type = "retweet";
  std::string hashtag_type = "hashtag";
  std::string url_type = "url";
  std::string mention_type = "mention";
  double threshold = 0.98;
  std::uint64_t seed = 0;
};

/// Pause symbol for a gap, or '\0' for gaps of at most one minute.
char bloc_pause(double gap_seconds);

/// Behavior string of one user's posts: per post an action symbol (T
/// original, r repost of another user, R self-repost) followed by its sorted
/// content symbols (t text, H hashtag, U url, m mention), with pause symbols
/// between posts.
std::string bloc_string(const std::vector<ActionEvent>& user_events, const BlocOptions& options = {});

/// TF-IDF of character bigrams of the behavior strings, users linked at
/// cosine >= threshold, Louvain over all dataset users.
DetectionResult bloc_detector(const Dataset& d, const BlocOptions& options = {});

/// Names accepted by run_baseline.
const std::vector<std::string>& baseline_names();

/// Dispatches by name ("hashtag_sequences", "rapid_retweets",
/// "coretweet_cardinality", "ratcliff_obershelp", "synchronized_actions",
/// "bloc"). Parameters: interval (s), action_type, filtering (true/false),
/// seed. ValidationError for unknown names or bad parameters.
DetectionResult run_baseline(const std::string& name, const Dataset& d,
                             const std::map<std::string, std::string>& parameters);

}  // namespace coordnet::baselines

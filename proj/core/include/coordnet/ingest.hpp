#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace coordnet {

/// One action-level data point: `user` performed `action_type` on
/// `content` at `timestamp` (seconds since a dataset-local epoch).
///
/// The remaining fields are optional post metadata. The core model ignores
/// them; the baseline detectors use them (post grouping, repost sources,
/// post text).
struct ActionEvent {
  std::string user;
  double timestamp = 0.0;
  std::string action_type;
  std::string content;

  std::string post_id;
  std::string text;
  std::string source_user;
  std::string source_post;
  std::optional<double> source_timestamp;

  bool operator==(const ActionEvent&) const = default;
};

struct Dataset {
  /// Sorted by timestamp (stable with respect to input order); no two
  /// events share the same (user, timestamp, action_type, content).
  std::vector<ActionEvent> events;
  std::vector<std::string> users;         // sorted, unique
  std::vector<std::string> action_types;  // sorted, unique
  std::pair<double, double> time_span{0.0, 0.0};

  bool empty() const noexcept { return events.empty(); }
  bool has_action_type(const std::string& a) const;
};

/// Sorts, deduplicates and validates `events` into a Dataset.
/// `declared_types` empty means the action-type set is inferred from the
/// events; otherwise it is closed and undeclared types are rejected.
Dataset make_dataset(std::vector<ActionEvent> events, std::vector<std::string> declared_types = {});

enum class InputFormat { jsonl, csv };

/// Input field names. Defaults match the native export format.
struct FieldMapping {
  std::string user = "user";
  std::string timestamp = "timestamp";
  std::string action_type = "action_type";
  std::string content = "content";
  std::string post_id = "post_id";
  std::string text = "text";
  std::string source_user = "source_user";
  std::string source_post = "source_post";
  std::string source_timestamp = "source_timestamp";
};

struct ParseOptions {
  InputFormat format = InputFormat::jsonl;
  FieldMapping fields;
  /// Closed action-type set; empty accepts any type.
  std::vector<std::string> declared_action_types;
  /// Renames applied to raw action-type values before validation, e.g.
  /// {"hashtag": "activity", "mention": "activity"} to fold modalities.
  std::map<std::string, std::string> action_type_aliases;
  /// Per raw action type, the field holding its content key (instead of
  /// fields.content), e.g. {"url": "expanded_url"}.
  std::map<std::string, std::string> content_fields;
};

/// Throws ParseError on malformed records and ValidationError on negative
/// timestamps, empty content or undeclared action types (both carry the
/// offending line number).
Dataset parse_events(std::istream& in, const ParseOptions& options = {});

void write_events_jsonl(std::ostream& out, const Dataset& d);
void write_events_csv(std::ostream& out, const Dataset& d);

/// Timestamps of one user under one content key, strictly ascending.
struct UserTimeline {
  std::string user;
  std::vector<double> times;
};

/// All activity on one content key k.
struct ContentActivity {
  std::string key;
  std::vector<UserTimeline> users;  // sorted by user id

  /// n_k: distinct users acting on k, repetitions not counted.
  std::size_t participants() const noexcept { return users.size(); }
};

/// Bipartite user/content structure of a single action type.
struct ActionIndex {
  std::string action_type;
  std::vector<ContentActivity> contents;  // sorted by key

  std::size_t event_count() const noexcept;
  const ContentActivity* find(const std::string& key) const;
  /// Sorted set of users appearing in the index.
  std::vector<std::string> users() const;
};

/// Throws ValidationError if `action_type` is not one of d's types.
ActionIndex build_action_index(const Dataset& d, const std::string& action_type);

enum class Label { authentic, coordinated };

struct GroundTruth {
  std::map<std::string, Label> labels;
  std::map<std::string, std::string> campaigns;  // optional, coordinated users only

  bool empty() const noexcept { return labels.empty(); }
  /// Unlabeled users are authentic.
  Label label_of(const std::string& user) const;
  bool is_positive(const std::string& user) const { return label_of(user) == Label::coordinated; }
  std::size_t positives() const;
  /// Class used for homogeneity: the campaign id when present, otherwise
  /// "coordinated" / "authentic".
  std::string class_of(const std::string& user) const;
  /// Users of `universe` without an explicit label (the warning set).
  std::vector<std::string> unlabeled(const std::vector<std::string>& universe) const;
};

/// CSV with header `user,label[,campaign]`. Labels: coordinated|inauthentic|1|true
/// and authentic|0|false (case-insensitive). Duplicate users and unknown
/// label tokens raise ValidationError.
GroundTruth load_ground_truth(std::istream& in);
void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt);

}  // namespace coordnet

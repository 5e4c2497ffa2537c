#include "coordnet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"
#include "json.hpp"

namespace coordnet {

namespace {

using json = nlohmann::json;

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void check_event(const ActionEvent& e, std::size_t line) {
  if (!std::isfinite(e.timestamp)) throw ValidationError(line, "timestamp is not finite");
  if (e.timestamp < 0) throw ValidationError(line, "negative timestamp " + csv::format_double(e.timestamp));
  if (e.user.empty()) throw ValidationError(line, "empty user id");
  if (e.action_type.empty()) throw ValidationError(line, "empty action_type");
  if (e.content.empty()) throw ValidationError(line, "empty content key");
}

class EventBuilder {
 public:
  explicit EventBuilder(const ParseOptions& opt) : opt_(opt) {
    declared_.insert(opt.declared_action_types.begin(), opt.declared_action_types.end());
  }

  void finish_event(ActionEvent e, std::size_t line) {
    if (auto it = opt_.action_type_aliases.find(e.action_type); it != opt_.action_type_aliases.end())
      e.action_type = it->second;
    check_event(e, line);
    if (!declared_.empty() && !declared_.count(e.action_type))
      throw ValidationError(line, "unknown action_type '" + e.action_type + "'");
    events_.push_back(std::move(e));
  }

  Dataset build() && { return make_dataset(std::move(events_), opt_.declared_action_types); }

 private:
  const ParseOptions& opt_;
  std::set<std::string> declared_;
  std::vector<ActionEvent> events_;
};

std::string json_scalar_to_string(const json& v, std::size_t line, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  throw ParseError(line, "field '" + field + "' must be a string or number");
}

double json_number(const json& v, std::size_t line, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    if (auto n = parse_number(v.get<std::string>())) return *n;
  }
  throw ParseError(line, "field '" + field + "' is not a number");
}

Dataset parse_jsonl(std::istream& in, const ParseOptions& opt) {
  const FieldMapping& f = opt.fields;
  EventBuilder builder(opt);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& ex) {
      throw ParseError(lineno, std::string("invalid JSON: ") + ex.what());
    }
    if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");
    auto required = [&](const std::string& key) -> const json& {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) throw ParseError(lineno, "missing field '" + key + "'");
      return *it;
    };
    auto optional_str = [&](const std::string& key) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) return {};
      return json_scalar_to_string(*it, lineno, key);
    };

    ActionEvent e;
    e.user = json_scalar_to_string(required(f.user), lineno, f.user);
    e.timestamp = json_number(required(f.timestamp), lineno, f.timestamp);
    e.action_type = json_scalar_to_string(required(f.action_type), lineno, f.action_type);
    const auto cf = opt.content_fields.find(e.action_type);
    const auto& content_field = cf != opt.content_fields.end() ? cf->second : f.content;
    e.content = json_scalar_to_string(required(content_field), lineno, content_field);
    e.post_id = optional_str(f.post_id);
    e.text = optional_str(f.text);
    e.source_user = optional_str(f.source_user);
    e.source_post = optional_str(f.source_post);
    if (auto it = obj.find(f.source_timestamp); it != obj.end() && !it->is_null())
      e.source_timestamp = json_number(*it, lineno, f.source_timestamp);
    builder.finish_event(std::move(e), lineno);
  }
  return std::move(builder).build();
}

Dataset parse_csv(std::istream& in, const ParseOptions& opt) {
  const FieldMapping& f = opt.fields;
  csv::Reader reader(in);
  auto header = reader.next();
  EventBuilder builder(opt);
  if (!header) return std::move(builder).build();

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) col.emplace((*header)[i], i);
  auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    auto it = col.find(name);
    if (it == col.end()) {
      if (required) throw ParseError(reader.record_line(), "header lacks column '" + name + "'");
      return std::nullopt;
    }
    return it->second;
  };
  const auto c_user = *column(f.user, true);
  const auto c_ts = *column(f.timestamp, true);
  const auto c_type = *column(f.action_type, true);
  const auto c_content = column(f.content, opt.content_fields.empty());
  const auto c_post = column(f.post_id, false);
  const auto c_text = column(f.text, false);
  const auto c_src_user = column(f.source_user, false);
  const auto c_src_post = column(f.source_post, false);
  const auto c_src_ts = column(f.source_timestamp, false);

  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    if (row->size() != header->size())
      throw ParseError(line, "expected " + std::to_string(header->size()) + " fields, got " +
                                 std::to_string(row->size()));
    auto cell = [&](std::optional<std::size_t> c) -> std::string { return c ? (*row)[*c] : std::string{}; };
    ActionEvent e;
    e.user = (*row)[c_user];
    auto ts = parse_number((*row)[c_ts]);
    if (!ts) throw ParseError(line, "field '" + f.timestamp + "' is not a number");
    e.timestamp = *ts;
    e.action_type = (*row)[c_type];
    if (auto cf = opt.content_fields.find(e.action_type); cf != opt.content_fields.end()) {
      auto it = col.find(cf->second);
      if (it == col.end()) throw ParseError(line, "header lacks column '" + cf->second + "'");
      e.content = (*row)[it->second];
    } else {
      if (!c_content) throw ParseError(line, "header lacks column '" + f.content + "'");
      e.content = (*row)[*c_content];
    }
    e.post_id = cell(c_post);
    e.text = cell(c_text);
    e.source_user = cell(c_src_user);
    e.source_post = cell(c_src_post);
    if (auto s = cell(c_src_ts); !s.empty()) {
      auto v = parse_number(s);
      if (!v) throw ParseError(line, "field '" + f.source_timestamp + "' is not a number");
      e.source_timestamp = *v;
    }
    builder.finish_event(std::move(e), line);
  }
  return std::move(builder).build();
}

}  // namespace

bool Dataset::has_action_type(const std::string& a) const {
  return std::binary_search(action_types.begin(), action_types.end(), a);
}

Dataset make_dataset(std::vector<ActionEvent> events, std::vector<std::string> declared_types) {
  std::set<std::string> declared(declared_types.begin(), declared_types.end());
  for (const auto& e : events) {
    check_event(e, 0);
    if (!declared.empty() && !declared.count(e.action_type))
      throw ValidationError("unknown action_type '" + e.action_type + "'");
  }

  // Collapse exact (u, t, a, k) duplicates, keeping the first occurrence.
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key_less = [&](std::size_t a, std::size_t b) {
    const auto& x = events[a];
    const auto& y = events[b];
    return std::tie(x.user, x.timestamp, x.action_type, x.content, a) <
           std::tie(y.user, y.timestamp, y.action_type, y.content, b);
  };
  std::sort(order.begin(), order.end(), key_less);
  std::vector<bool> keep(events.size(), true);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& x = events[order[i - 1]];
    const auto& y = events[order[i]];
    if (x.user == y.user && x.timestamp == y.timestamp && x.action_type == y.action_type && x.content == y.content)
      keep[order[i]] = false;
  }

  Dataset d;
  d.events.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    if (keep[i]) d.events.push_back(std::move(events[i]));
  std::stable_sort(d.events.begin(), d.events.end(),
                   [](const ActionEvent& a, const ActionEvent& b) { return a.timestamp < b.timestamp; });

  std::set<std::string> users;
  std::set<std::string> types = declared;
  for (const auto& e : d.events) {
    users.insert(e.user);
    types.insert(e.action_type);
  }
  d.users.assign(users.begin(), users.end());
  d.action_types.assign(types.begin(), types.end());
  if (!d.events.empty()) d.time_span = {d.events.front().timestamp, d.events.back().timestamp};
  return d;
}

Dataset parse_events(std::istream& in, const ParseOptions& options) {
  return options.format == InputFormat::jsonl ? parse_jsonl(in, options) : parse_csv(in, options);
}

void write_events_jsonl(std::ostream& out, const Dataset& d) {
  for (const auto& e : d.events) {
    json obj = {{"user", e.user}, {"timestamp", e.timestamp}, {"action_type", e.action_type}, {"content", e.content}};
    if (!e.post_id.empty()) obj["post_id"] = e.post_id;
    if (!e.text.empty()) obj["text"] = e.text;
    if (!e.source_user.empty()) obj["source_user"] = e.source_user;
    if (!e.source_post.empty()) obj["source_post"] = e.source_post;
    if (e.source_timestamp) obj["source_timestamp"] = *e.source_timestamp;
    out << obj.dump() << '\n';
  }
}

void write_events_csv(std::ostream& out, const Dataset& d) {
  csv::write_row(out, {"user", "timestamp", "action_type", "content", "post_id", "text", "source_user", "source_post",
                       "source_timestamp"});
  for (const auto& e : d.events) {
    csv::write_row(out, {e.user, csv::format_double(e.timestamp), e.action_type, e.content, e.post_id, e.text,
                         e.source_user, e.source_post,
                         e.source_timestamp ? csv::format_double(*e.source_timestamp) : std::string{}});
  }
}

std::size_t ActionIndex::event_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : contents)
    for (const auto& u : c.users) n += u.times.size();
  return n;
}

const ContentActivity* ActionIndex::find(const std::string& key) const {
  auto it = std::lower_bound(contents.begin(), contents.end(), key,
                             [](const ContentActivity& c, const std::string& k) { return c.key < k; });
  return it != contents.end() && it->key == key ? &*it : nullptr;
}

std::vector<std::string> ActionIndex::users() const {
  std::set<std::string> s;
  for (const auto& c : contents)
    for (const auto& u : c.users) s.insert(u.user);
  return {s.begin(), s.end()};
}

ActionIndex build_action_index(const Dataset& d, const std::string& action_type) {
  if (!d.has_action_type(action_type)) throw ValidationError("unknown action type '" + action_type + "'");
  std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
  for (const auto& e : d.events)
    if (e.action_type == action_type) grouped[e.content][e.user].push_back(e.timestamp);

  ActionIndex idx;
  idx.action_type = action_type;
  idx.contents.reserve(grouped.size());
  for (auto& [key, per_user] : grouped) {
    ContentActivity c;
    c.key = key;
    c.users.reserve(per_user.size());
    for (auto& [user, times] : per_user) {
      std::sort(times.begin(), times.end());
      // Events are deduplicated on (u,t,a,k), so times are already distinct.
      times.erase(std::unique(times.begin(), times.end()), times.end());
      c.users.push_back({user, std::move(times)});
    }
    idx.contents.push_back(std::move(c));
  }
  return idx;
}

Label GroundTruth::label_of(const std::string& user) const {
  auto it = labels.find(user);
  return it == labels.end() ? Label::authentic : it->second;
}

std::size_t GroundTruth::positives() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& kv) { return kv.second == Label::coordinated; }));
}

std::string GroundTruth::class_of(const std::string& user) const {
  if (label_of(user) == Label::authentic) return "authentic";
  auto it = campaigns.find(user);
  return it != campaigns.end() && !it->second.empty() ? "campaign:" + it->second : "coordinated";
}

std::vector<std::string> GroundTruth::unlabeled(const std::vector<std::string>& universe) const {
  std::vector<std::string> out;
  for (const auto& u : universe)
    if (!labels.count(u)) out.push_back(u);
  return out;
}

GroundTruth load_ground_truth(std::istream& in) {
  csv::Reader reader(in);
  GroundTruth gt;
  auto header = reader.next();
  if (!header) return gt;
  std::optional<std::size_t> c_user, c_label, c_campaign;
  for (std::size_t i = 0; i < header->size(); ++i) {
    const auto name = to_lower((*header)[i]);
    if (name == "user") c_user = i;
    else if (name == "label") c_label = i;
    else if (name == "campaign") c_campaign = i;
  }
  if (!c_user || !c_label) throw ParseError(reader.record_line(), "ground truth header must contain user,label");

  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    if (row->size() != header->size())
      throw ParseError(line, "expected " + std::to_string(header->size()) + " fields, got " +
                                 std::to_string(row->size()));
    const std::string& user = (*row)[*c_user];
    if (user.empty()) throw ValidationError(line, "empty user id");
    const std::string token = to_lower((*row)[*c_label]);
    Label label;
    if (token == "coordinated" || token == "inauthentic" || token == "1" || token == "true")
      label = Label::coordinated;
    else if (token == "authentic" || token == "0" || token == "false")
      label = Label::authentic;
    else
      throw ValidationError(line, "unknown label '" + (*row)[*c_label] + "'");
    if (!gt.labels.emplace(user, label).second) throw ValidationError(line, "duplicate user '" + user + "'");
    if (c_campaign && label == Label::coordinated && !(*row)[*c_campaign].empty())
      gt.campaigns[user] = (*row)[*c_campaign];
  }
  return gt;
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& gt) {
  const bool with_campaign = !gt.campaigns.empty();
  if (with_campaign)
    csv::write_row(out, {"user", "label", "campaign"});
  else
    csv::write_row(out, {"user", "label"});
  for (const auto& [user, label] : gt.labels) {
    std::vector<std::string> row{user, label == Label::coordinated ? "coordinated" : "authentic"};
    if (with_campaign) {
      auto it = gt.campaigns.find(user);
      row.push_back(it == gt.campaigns.end() ? std::string{} : it->second);
    }
    csv::write_row(out, row);
  }
}

}  // namespace coordnet

#include "coordnet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "coordnet/csv.hpp"
#include "coordnet/error.hpp"

namespace coordnet {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::map<std::string, double> kTimeUnits{{"seconds", 1.0}, {"minutes", 60.0}, {"hours", 3600.0}};

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ValidationError("unknown setting '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError("setting '" + where + key + "' has the wrong type");
  }
}

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  return out.empty() ? "_" : out;
}

std::string method_name(Method m) { return m == Method::leiden ? "leiden" : "louvain"; }

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (events.empty()) throw ValidationError("inputs.events is required");
  if (action_types.empty()) throw ValidationError("action_types must declare at least one action type");
  for (const auto& a : action_types)
    if (a.name.empty()) throw ValidationError("action type names must be non-empty");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("kernel.eps must lie in (0, 1]");
  if (!(beta_min >= 0.0)) throw ValidationError("beta_grid.min must be >= 0");
  if (!(beta_step > 0.0)) throw ValidationError("beta_grid.step must be > 0");
  if (!(beta_max >= beta_min) || !std::isfinite(beta_max)) throw ValidationError("beta_grid.max must be >= min");
  if (!kTimeUnits.count(time_unit)) throw ValidationError("beta_grid.time_unit must be seconds, minutes or hours");
  if (!(gamma >= 0.0)) throw ValidationError("community.gamma must be >= 0");
  if (!(omega >= 0.0)) throw ValidationError("community.omega must be >= 0");
  if (output_dir.empty()) throw ValidationError("output.dir is required");
  for (const auto& f : formats)
    if (f != "graphml" && f != "csv") throw ValidationError("unknown output format '" + f + "'");
  if (threads == 0) throw ValidationError("threads must be >= 1");
}

double PipelineConfig::time_unit_seconds() const {
  auto it = kTimeUnits.find(time_unit);
  if (it == kTimeUnits.end()) throw ValidationError("unknown time unit '" + time_unit + "'");
  return it->second;
}

std::vector<double> PipelineConfig::grid() const { return make_grid(beta_min, beta_max, beta_step); }

std::vector<std::string> PipelineConfig::layer_names() const {
  std::vector<std::string> out;
  for (const auto& a : action_types) {
    auto it = action_type_aliases.find(a.name);
    const auto& name = it != action_type_aliases.end() ? it->second : a.name;
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

PipelineConfig config_from_json(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("configuration is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"inputs", "fields", "action_types", "action_type_aliases", "kernel", "beta_grid", "community",
                     "seed", "output", "threads"});
  PipelineConfig cfg;
  if (auto it = j.find("inputs"); it != j.end()) {
    check_keys(*it, "inputs", {"events", "format", "ground_truth"});
    std::string events, format = "jsonl", truth;
    read(*it, "events", events, "inputs.");
    read(*it, "format", format, "inputs.");
    read(*it, "ground_truth", truth, "inputs.");
    cfg.events = resolve(events, base_dir);
    cfg.ground_truth = resolve(truth, base_dir);
    if (format == "jsonl") cfg.format = InputFormat::jsonl;
    else if (format == "csv") cfg.format = InputFormat::csv;
    else throw ValidationError("inputs.format must be jsonl or csv");
  }
  if (auto it = j.find("fields"); it != j.end()) {
    check_keys(*it, "fields", {"user", "timestamp", "action_type", "content", "post_id", "text", "source_user",
                               "source_post", "source_timestamp"});
    auto& f = cfg.fields;
    read(*it, "user", f.user, "fields.");
    read(*it, "timestamp", f.timestamp, "fields.");
    read(*it, "action_type", f.action_type, "fields.");
    read(*it, "content", f.content, "fields.");
    read(*it, "post_id", f.post_id, "fields.");
    read(*it, "text", f.text, "fields.");
    read(*it, "source_user", f.source_user, "fields.");
    read(*it, "source_post", f.source_post, "fields.");
    read(*it, "source_timestamp", f.source_timestamp, "fields.");
  }
  if (auto it = j.find("action_types"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("action_types must be a list");
    for (const auto& a : *it) {
      ActionTypeConfig t;
      if (a.is_string()) {
        t.name = a.get<std::string>();
      } else {
        check_keys(a, "action_types[]", {"name", "content_field"});
        read(a, "name", t.name, "action_types[].");
        read(a, "content_field", t.content_field, "action_types[].");
      }
      cfg.action_types.push_back(std::move(t));
    }
  }
  read(j, "action_type_aliases", cfg.action_type_aliases, "");
  if (auto it = j.find("kernel"); it != j.end()) {
    check_keys(*it, "kernel", {"eps", "union"});
    read(*it, "eps", cfg.eps, "kernel.");
    std::string mode = "additive";
    read(*it, "union", mode, "kernel.");
    if (mode == "additive") cfg.union_mode = UnionMode::additive;
    else if (mode == "max_multiplicity") cfg.union_mode = UnionMode::max_multiplicity;
    else throw ValidationError("kernel.union must be additive or max_multiplicity");
  }
  if (auto it = j.find("beta_grid"); it != j.end()) {
    check_keys(*it, "beta_grid", {"min", "max", "step", "time_unit"});
    read(*it, "min", cfg.beta_min, "beta_grid.");
    read(*it, "max", cfg.beta_max, "beta_grid.");
    read(*it, "step", cfg.beta_step, "beta_grid.");
    read(*it, "time_unit", cfg.time_unit, "beta_grid.");
  }
  if (auto it = j.find("community"); it != j.end()) {
    check_keys(*it, "community", {"gamma", "omega", "method"});
    read(*it, "gamma", cfg.gamma, "community.");
    read(*it, "omega", cfg.omega, "community.");
    std::string method = "leiden";
    read(*it, "method", method, "community.");
    if (method == "leiden") cfg.method = Method::leiden;
    else if (method == "louvain") cfg.method = Method::louvain;
    else throw ValidationError("community.method must be leiden or louvain");
  }
  read(j, "seed", cfg.seed, "");
  if (auto it = j.find("output"); it != j.end()) {
    check_keys(*it, "output", {"dir", "formats"});
    std::string dir;
    read(*it, "dir", dir, "output.");
    cfg.output_dir = resolve(dir, base_dir);
    read(*it, "formats", cfg.formats, "output.");
  }
  read(j, "threads", cfg.threads, "");
  if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
  return cfg;
}

std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& assignments) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("configuration is not valid JSON: ") + e.what());
  }
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + a + "' is not key=value");
    const auto key = a.substr(0, eq);
    const auto raw = a.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ValidationError("override key '" + key + "' has an empty component");
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ValidationError("override key '" + key + "' does not name an object member");
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = value;
  }
  return j.dump();
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  auto text = read_file(path);
  if (!overrides.empty()) text = apply_overrides(text, overrides);
  return config_from_json(text, path.parent_path());
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["inputs"] = {{"events", cfg.events.string()},
                 {"format", cfg.format == InputFormat::jsonl ? "jsonl" : "csv"},
                 {"ground_truth", cfg.ground_truth.string()}};
  const auto& f = cfg.fields;
  j["fields"] = {{"user", f.user},
                 {"timestamp", f.timestamp},
                 {"action_type", f.action_type},
                 {"content", f.content},
                 {"post_id", f.post_id},
                 {"text", f.text},
                 {"source_user", f.source_user},
                 {"source_post", f.source_post},
                 {"source_timestamp", f.source_timestamp}};
  j["action_types"] = json::array();
  for (const auto& a : cfg.action_types) {
    if (a.content_field.empty()) j["action_types"].push_back(a.name);
    else j["action_types"].push_back({{"name", a.name}, {"content_field", a.content_field}});
  }
  j["action_type_aliases"] = cfg.action_type_aliases;
  j["kernel"] = {{"eps", cfg.eps},
                 {"union", cfg.union_mode == UnionMode::additive ? "additive" : "max_multiplicity"}};
  j["beta_grid"] = {{"min", cfg.beta_min}, {"max", cfg.beta_max}, {"step", cfg.beta_step}, {"time_unit", cfg.time_unit}};
  j["community"] = {{"gamma", cfg.gamma}, {"omega", cfg.omega}, {"method", method_name(cfg.method)}};
  j["seed"] = cfg.seed;
  j["output"] = {{"dir", cfg.output_dir.string()}, {"formats", cfg.formats}};
  j["threads"] = cfg.threads;
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
  // The thread count does not change any output, so it is left out.
  auto copy = cfg;
  copy.threads = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(copy)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

fs::path default_output_dir() {
  if (const char* env = std::getenv("COORDNET_OUT_DIR"); env && *env) return env;
  return "coordnet-out";
}

Dataset load_events(const PipelineConfig& cfg) {
  ParseOptions opt;
  opt.format = cfg.format;
  opt.fields = cfg.fields;
  opt.declared_action_types = cfg.layer_names();
  opt.action_type_aliases = cfg.action_type_aliases;
  for (const auto& a : cfg.action_types)
    if (!a.content_field.empty()) opt.content_fields[a.name] = a.content_field;
  std::ifstream in(cfg.events, std::ios::binary);
  if (!in) throw ValidationError("cannot open events file " + cfg.events.string());
  return parse_events(in, opt);
}

GroundTruth load_truth(const PipelineConfig& cfg) {
  if (cfg.ground_truth.empty()) return {};
  std::ifstream in(cfg.ground_truth, std::ios::binary);
  if (!in) throw ValidationError("cannot open ground truth file " + cfg.ground_truth.string());
  return load_ground_truth(in);
}

TuneOutcome tune_layers(const Dataset& d, const PipelineConfig& cfg) {
  TuneOptions opt;
  opt.layer.eps = cfg.eps;
  opt.layer.union_mode = cfg.union_mode;
  opt.sweep.gamma = cfg.gamma;
  opt.sweep.seed = cfg.seed;
  opt.sweep.method = cfg.method;
  opt.sweep.threads = cfg.threads;
  opt.time_unit_seconds = cfg.time_unit_seconds();
  const auto grid = cfg.grid();

  TuneOutcome out;
  for (const auto& name : cfg.layer_names()) {
    const auto index = build_action_index(d, name);
    try {
      out.layers.push_back({name, tune_beta(index, grid, d.users, opt)});
    } catch (const UndefinedResult& e) {
      out.warnings.push_back("layer '" + name + "' skipped: " + e.what());
    }
  }
  if (out.layers.empty()) throw UndefinedResult("no layer shows coordination evidence");
  return out;
}

std::vector<LayerGraph> build_layers(const Dataset& d, const PipelineConfig& cfg,
                                     const std::map<std::string, double>& beta_star) {
  LayerOptions opt;
  opt.eps = cfg.eps;
  opt.union_mode = cfg.union_mode;
  opt.threads = cfg.threads;
  std::vector<LayerGraph> layers;
  for (const auto& name : cfg.layer_names()) {
    auto it = beta_star.find(name);
    if (it == beta_star.end()) continue;  // skipped during tuning
    layers.push_back(build_layer(build_action_index(d, name), it->second / cfg.time_unit_seconds(), d.users, opt));
  }
  return layers;
}

ClusterOutcome cluster_layers(const std::vector<std::string>& universe, const std::vector<LayerGraph>& layers,
                              const PipelineConfig& cfg) {
  MultiplexNetwork mx;
  mx.universe = universe;
  mx.layers = layers;
  mx.gamma = cfg.gamma;
  mx.omega = cfg.omega;
  ClusterOutcome out;
  out.partition = cluster_multiplex(mx, cfg.seed, cfg.method);
  out.modularity = multislice_modularity(mx, out.partition);
  for (const auto& g : layers) out.layer_modularity.push_back(modularity(g, out.partition, cfg.gamma).value);
  return out;
}

std::vector<std::string> write_sweeps(const fs::path& dir, const std::vector<TunedLayer>& layers) {
  std::vector<std::string> written;
  ordered_json betas;
  betas["layers"] = ordered_json::array();
  for (const auto& l : layers) {
    std::ostringstream csv_out;
    write_sweep_csv(csv_out, l.sweep);
    const auto rel = "sweeps/" + file_stem(l.action_type) + ".csv";
    write_file(dir / rel, csv_out.str());
    written.push_back(rel);
    betas["layers"].push_back({{"action_type", l.action_type},
                               {"beta_star", l.sweep.beta_star},
                               {"q_star", l.sweep.q_star},
                               {"time_unit_seconds", l.sweep.time_unit_seconds},
                               {"beta_star_per_second", l.sweep.beta_star / l.sweep.time_unit_seconds}});
  }
  write_file(dir / "betas.json", betas.dump(2) + "\n");
  written.push_back("betas.json");
  return written;
}

std::map<std::string, double> read_betas(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_file(dir / "betas.json"));
    std::map<std::string, double> out;
    for (const auto& l : j.at("layers")) out[l.at("action_type").get<std::string>()] = l.at("beta_star").get<double>();
    return out;
  } catch (const json::exception& e) {
    throw ValidationError("malformed betas.json: " + std::string(e.what()));
  }
}

std::vector<std::string> write_layers(const fs::path& dir, const std::vector<LayerGraph>& layers,
                                      const std::vector<std::string>& formats) {
  std::vector<std::string> written;
  const bool graphml = std::find(formats.begin(), formats.end(), "graphml") != formats.end();
  const bool edges = std::find(formats.begin(), formats.end(), "csv") != formats.end();
  for (const auto& g : layers) {
    const auto stem = "layers/" + file_stem(g.action_type);
    if (graphml) {
      std::ostringstream out;
      write_graphml(out, g);
      write_file(dir / (stem + ".graphml"), out.str());
      written.push_back(stem + ".graphml");
    }
    if (edges) {
      std::ostringstream out;
      write_edge_csv(out, g);
      write_file(dir / (stem + ".csv"), out.str());
      written.push_back(stem + ".csv");
    }
  }
  return written;
}

std::vector<LayerGraph> read_layers(const fs::path& dir, const std::vector<std::string>& universe,
                                    const std::vector<std::string>& names, const std::map<std::string, double>& betas,
                                    double time_unit_seconds) {
  std::vector<LayerGraph> layers;
  for (const auto& name : names) {
    auto it = betas.find(name);
    if (it == betas.end()) continue;
    const auto path = dir / ("layers/" + file_stem(name) + ".csv");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing layer edge list " + path.string() + " (run build-layers with csv output)");
    layers.push_back(read_edge_csv(in, universe, name, it->second / time_unit_seconds));
  }
  return layers;
}

std::vector<std::string> write_clusters(const fs::path& dir, const ClusterOutcome& c,
                                        const std::vector<LayerGraph>& layers) {
  std::ostringstream part;
  write_partition_csv(part, c.partition);
  write_file(dir / "partition.csv", part.str());

  ordered_json j;
  j["community_count"] = c.partition.community_count();
  j["singleton_count"] = c.partition.singleton_count();
  j["multislice_modularity"] = {{"value", c.modularity.value},
                                {"intra_layer", c.modularity.intra_layer},
                                {"coupling", c.modularity.coupling},
                                {"degenerate", c.modularity.degenerate}};
  j["layers"] = ordered_json::array();
  for (std::size_t i = 0; i < layers.size(); ++i)
    j["layers"].push_back({{"action_type", layers[i].action_type},
                           {"beta_per_second", layers[i].beta},
                           {"edges", layers[i].edges.size()},
                           {"modularity", c.layer_modularity[i]}});
  j["communities"] = ordered_json::array();
  const auto groups = c.partition.groups();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    std::vector<std::string> members;
    for (auto n : groups[k]) members.push_back(c.partition.nodes()[n]);
    j["communities"].push_back({{"id", k}, {"size", members.size()}, {"members", members}});
  }
  write_file(dir / "communities.json", j.dump(2) + "\n");
  return {"partition.csv", "communities.json"};
}

std::string evaluation_json(const EvalReport& r, const std::vector<std::string>& unlabeled) {
  ordered_json j;
  j["f1_star"] = r.f1_star;
  j["precision_star"] = r.precision_star;
  j["recall_star"] = r.recall_star;
  j["best_cluster"] = r.best_cluster;
  j["homogeneity"] = r.homogeneity;
  j["weighted_precision"] = r.weighted_precision;
  j["nmi_binarized"] = r.nmi_binarized;
  j["cluster_count"] = r.cluster_count;
  j["singleton_count"] = r.singleton_count;
  j["warnings"] = ordered_json::array();
  if (!unlabeled.empty())
    j["warnings"].push_back(std::to_string(unlabeled.size()) + " users without a label were scored as authentic");
  j["unlabeled_users"] = unlabeled;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_evaluation(const fs::path& dir, const Partition& p, const GroundTruth& gt) {
  write_file(dir / "evaluation.json", evaluation_json(evaluate(p, gt), gt.unlabeled(p.nodes())));
  return {"evaluation.json"};
}

ExitCode classify_error(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kValidationError;
  return kRuntimeError;
}

std::string error_json(const std::string& stage, const std::exception& e) {
  ordered_json j;
  j["status"] = "error";
  j["stage"] = stage;
  j["kind"] = classify_error(e) == kValidationError ? "validation" : "runtime";
  j["message"] = e.what();
  if (auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line()) j["line"] = pe->line();
  if (auto* ve = dynamic_cast<const ValidationError*>(&e); ve && ve->line()) j["line"] = ve->line();
  return j.dump(2) + "\n";
}

RunOutcome run_pipeline(const PipelineConfig& cfg) {
  RunOutcome out;
  std::string stage = "config";
  const auto& dir = cfg.output_dir;
  try {
    cfg.validate();
    std::error_code ec;
    fs::remove(dir / "error.json", ec);

    stage = "ingest";
    const auto d = load_events(cfg);
    const auto gt = load_truth(cfg);

    stage = "tune";
    const auto tuned = tune_layers(d, cfg);
    auto w = write_sweeps(dir, tuned.layers);
    out.artifacts.insert(out.artifacts.end(), w.begin(), w.end());

    stage = "layers";
    std::map<std::string, double> betas;
    for (const auto& l : tuned.layers) betas[l.action_type] = l.sweep.beta_star;
    const auto layers = build_layers(d, cfg, betas);
    w = write_layers(dir, layers, cfg.formats);
    out.artifacts.insert(out.artifacts.end(), w.begin(), w.end());

    stage = "cluster";
    const auto clusters = cluster_layers(d.users, layers, cfg);
    w = write_clusters(dir, clusters, layers);
    out.artifacts.insert(out.artifacts.end(), w.begin(), w.end());

    if (!cfg.ground_truth.empty()) {
      stage = "evaluate";
      w = write_evaluation(dir, clusters.partition, gt);
      out.artifacts.insert(out.artifacts.end(), w.begin(), w.end());
    }

    stage = "manifest";
    std::sort(out.artifacts.begin(), out.artifacts.end());
    ordered_json m;
    m["tool"] = "coordnet";
    m["version"] = COORDNET_VERSION;
    m["config_hash"] = hex64(config_hash(cfg));
    m["seed"] = cfg.seed;
    m["layers"] = ordered_json::array();
    for (const auto& l : tuned.layers) m["layers"].push_back(l.action_type);
    m["warnings"] = tuned.warnings;
    m["artifacts"] = out.artifacts;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    out.artifacts.push_back("manifest.json");
    return out;
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& rel : out.artifacts) fs::remove(dir / rel, ec);
    out.artifacts.clear();
    out.status = classify_error(e);
    out.error = error_json(stage, e);
    if (!dir.empty()) {
      try {
        write_file(dir / "error.json", out.error);
      } catch (const std::exception&) {
        // the error is still returned to the caller
      }
    }
    return out;
  }
}

}  // namespace coordnet

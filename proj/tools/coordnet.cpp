// coordnet command-line front-end. Each subcommand is a thin wrapper over
// the library; `run` is the whole pipeline in one go.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coordnet/baselines.hpp"
#include "coordnet/error.hpp"
#include "coordnet/layers.hpp"
#include "coordnet/metrics.hpp"
#include "coordnet/pipeline.hpp"
#include "coordnet/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace coordnet;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
  std::string config;
  std::vector<std::string> overrides;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  cmd->add_option("--seed", c.seed, "Random seed (overrides the configuration)");
  cmd->add_option("--out", c.out, "Output directory (default: $COORDNET_OUT_DIR or ./coordnet-out)");
  cmd->add_option("--format", c.format, "Report format on stdout")->check(CLI::IsMember({"text", "json"}));
  if (with_config) {
    cmd->add_option("--config", c.config, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a configuration value, e.g. --set community.gamma=1.2");
    cmd->add_option("--threads", c.threads, "Worker threads");
  }
}

fs::path out_dir(const Common& c) { return c.out.empty() ? default_output_dir() : fs::path(c.out); }

PipelineConfig config_of(const Common& c, bool validate = true) {
  auto cfg = load_config(c.config, c.overrides);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.threads) cfg.threads = *c.threads;
  if (validate) cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void report(const Common& c, const json& j) {
  if (c.format == "json") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) std::cout << k << ": " << v.get<std::string>() << "\n";
    else std::cout << k << ": " << v.dump() << "\n";
  }
}

json artifact_report(const fs::path& dir, std::vector<std::string> artifacts) {
  std::sort(artifacts.begin(), artifacts.end());
  json j;
  j["status"] = "ok";
  j["output_dir"] = dir.string();
  j["artifacts"] = artifacts;
  return j;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

std::map<std::string, std::string> key_values(const std::vector<std::string>& items, const std::string& what) {
  std::map<std::string, std::string> out;
  for (const auto& p : items) {
    auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError(what + " '" + p + "' is not key=value");
    out[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return out;
}

Dataset read_dataset(const std::string& path, const std::string& format) {
  ParseOptions opt;
  opt.format = format == "csv" ? InputFormat::csv : InputFormat::jsonl;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open events file " + path);
  return parse_events(in, opt);
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open ground truth file " + path);
  return load_ground_truth(in);
}

json scores_json(const EvalReport& r) {
  return json::parse(evaluation_json(r, {}));
}

// Writes the single-row score CSV the rank subcommand consumes.
std::string score_row(const std::string& method, const std::string& dataset, const EvalReport& r) {
  std::ostringstream s;
  write_eval_csv_header(s);
  write_eval_csv_row(s, method, dataset, r);
  return s.str();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string kinds;
};

json simulation_config(const std::vector<synth::Pattern>& kinds, std::uint64_t seed) {
  json cfg;
  cfg["inputs"] = {{"events", "events.jsonl"}, {"format", "jsonl"}, {"ground_truth", "truth.csv"}};
  if (kinds.size() == 1) {
    // one simulation, every modality folded into a single layer
    cfg["action_types"] = {"hashtag", "mention", "url"};
    cfg["action_type_aliases"] = {{"hashtag", "activity"}, {"mention", "activity"}, {"url", "activity"}};
  } else {
    cfg["action_types"] = json::array();
    for (auto k : kinds) cfg["action_types"].push_back("sim" + std::to_string(static_cast<int>(k)));
  }
  cfg["kernel"] = {{"eps", 1e-6}, {"union", "additive"}};
  cfg["beta_grid"] = {{"min", 0.0}, {"max", 10.0}, {"step", 0.01}, {"time_unit", "minutes"}};
  cfg["community"] = {{"gamma", 1.0}, {"omega", 1.0}, {"method", "leiden"}};
  cfg["seed"] = seed;
  cfg["output"] = {{"dir", "run"}, {"formats", {"graphml", "csv"}}};
  return cfg;
}

json cmd_simulate(const Common& c, const SimulateArgs& a) {
  std::vector<synth::Pattern> kinds;
  for (const auto& k : split(a.kinds, ',')) kinds.push_back(synth::parse_pattern(k));
  if (kinds.empty()) throw ValidationError("no simulation kind given");
  for (std::size_t i = 0; i < kinds.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (kinds[i] == kinds[j]) throw ValidationError("simulation kind repeated: " + a.kinds);

  synth::SimulationConfig sc;
  sc.seed = c.seed.value_or(1);
  sc.validate();
  const auto sim = kinds.size() == 1 ? synth::simulate(kinds[0], sc) : synth::simulate_layers(kinds, sc);

  const auto dir = out_dir(c);
  std::ostringstream events, truth, raster;
  write_events_jsonl(events, sim.dataset);
  write_ground_truth_csv(truth, sim.truth);
  synth::write_raster_csv(raster, sim.dataset.events);
  json windows = json::array();
  for (const auto& w : sim.windows)
    windows.push_back({{"start", w.start}, {"end", w.end}, {"rate_per_minute", w.rate_per_minute}, {"active", w.active}});

  write_text(dir / "events.jsonl", events.str());
  write_text(dir / "truth.csv", truth.str());
  write_text(dir / "raster.csv", raster.str());
  write_text(dir / "windows.json", windows.dump(2) + "\n");
  write_text(dir / "pipeline.json", simulation_config(kinds, sc.seed).dump(2) + "\n");

  auto j = artifact_report(dir, {"events.jsonl", "pipeline.json", "raster.csv", "truth.csv", "windows.json"});
  j["events"] = sim.dataset.events.size();
  j["users"] = sim.dataset.users.size();
  j["seed"] = sc.seed;
  return j;
}

// --- tune-beta ----------------------------------------------------------------

struct TuneArgs {
  std::string parametric;
  double beta_min = 0.0;
  double beta_max = 10.0;
  double beta_step = 0.01;
};

json cmd_tune_parametric(const Common& c, const TuneArgs& a) {
  std::ifstream in(a.parametric, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + a.parametric);
  const auto edges = read_parametric_edges(in);
  if (!(a.beta_min >= 0.0) || !(a.beta_step > 0.0) || !(a.beta_max >= a.beta_min))
    throw ValidationError("beta grid needs 0 <= min <= max and step > 0");
  const auto grid = make_grid(a.beta_min, a.beta_max, a.beta_step);
  SweepOptions opt;
  opt.seed = c.seed.value_or(0);
  const auto r = sweep_beta([&](double b) { return parametric_layer(edges, b); }, grid, opt);

  const auto dir = out_dir(c);
  std::ostringstream csv_out;
  write_sweep_csv(csv_out, r);
  write_text(dir / "sweeps/parametric.csv", csv_out.str());
  auto j = artifact_report(dir, {"sweeps/parametric.csv"});
  j["beta_star"] = r.beta_star;
  j["q_star"] = r.q_star;
  j["q_at_min"] = r.q_curve.front();
  j["q_at_max"] = r.q_curve.back();
  return j;
}

json cmd_tune(const Common& c) {
  const auto cfg = config_of(c);
  const auto d = load_events(cfg);
  const auto tuned = tune_layers(d, cfg);
  auto j = artifact_report(cfg.output_dir, write_sweeps(cfg.output_dir, tuned.layers));
  j["betas"] = json::object();
  for (const auto& l : tuned.layers) j["betas"][l.action_type] = l.sweep.beta_star;
  j["time_unit"] = cfg.time_unit;
  j["warnings"] = tuned.warnings;
  return j;
}

// --- build-layers / cluster -------------------------------------------------------

struct LayerArgs {
  std::vector<std::string> betas;
};

json cmd_build_layers(const Common& c, const LayerArgs& a) {
  const auto cfg = config_of(c);
  std::map<std::string, double> betas;
  if (a.betas.empty()) {
    betas = read_betas(cfg.output_dir);
  } else {
    for (const auto& [k, v] : key_values(a.betas, "--beta")) {
      try {
        betas[k] = std::stod(v);
      } catch (const std::exception&) {
        throw ValidationError("--beta " + k + " is not a number");
      }
    }
  }
  const auto d = load_events(cfg);
  const auto layers = build_layers(d, cfg, betas);
  auto j = artifact_report(cfg.output_dir, write_layers(cfg.output_dir, layers, cfg.formats));
  j["layers"] = json::array();
  for (const auto& g : layers) j["layers"].push_back({{"action_type", g.action_type}, {"edges", g.edges.size()}});
  return j;
}

json cmd_cluster(const Common& c) {
  const auto cfg = config_of(c);
  const auto d = load_events(cfg);
  const auto layers =
      read_layers(cfg.output_dir, d.users, cfg.layer_names(), read_betas(cfg.output_dir), cfg.time_unit_seconds());
  if (layers.empty()) throw ValidationError("betas.json names none of the configured layers");
  const auto out = cluster_layers(d.users, layers, cfg);
  auto j = artifact_report(cfg.output_dir, write_clusters(cfg.output_dir, out, layers));
  j["communities"] = out.partition.community_count();
  j["singletons"] = out.partition.singleton_count();
  j["multislice_modularity"] = out.modularity.value;
  return j;
}

// --- evaluate -------------------------------------------------------------------

struct EvaluateArgs {
  std::string partition;
  std::string detection;
  std::string truth;
  std::string events;
  std::string events_format = "jsonl";
  std::string method;
  std::string dataset;
};

json cmd_evaluate(const Common& c, const EvaluateArgs& a) {
  const auto gt = read_truth(a.truth);
  EvalReport r;
  std::vector<std::string> unlabeled;
  if (!a.partition.empty()) {
    std::ifstream in(a.partition, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + a.partition);
    const auto p = read_partition_csv(in);
    r = evaluate(p, gt);
    unlabeled = gt.unlabeled(p.nodes());
  } else {
    const auto det = baselines::detection_from_json(read_text(a.detection));
    if (det.kind == baselines::DetectionResult::Kind::partition) {
      r = evaluate(det.partition, gt);
      unlabeled = gt.unlabeled(det.partition.nodes());
    } else {
      std::vector<std::string> universe;
      if (!a.events.empty()) {
        universe = read_dataset(a.events, a.events_format).users;
      } else {
        for (const auto& [u, label] : gt.labels) universe.push_back(u);
      }
      for (const auto& u : det.flagged)
        if (!std::binary_search(universe.begin(), universe.end(), u)) universe.insert(
            std::lower_bound(universe.begin(), universe.end(), u), u);
      r = evaluate_flagged(det.flagged, universe, gt);
      unlabeled = gt.unlabeled(universe);
    }
  }

  const auto dir = out_dir(c);
  std::vector<std::string> written{"evaluation.json"};
  write_text(dir / "evaluation.json", evaluation_json(r, unlabeled));
  if (!a.method.empty()) {
    write_text(dir / "scores.csv", score_row(a.method, a.dataset.empty() ? "dataset" : a.dataset, r));
    written.push_back("scores.csv");
  }
  auto j = artifact_report(dir, written);
  j["scores"] = scores_json(r);
  return j;
}

// --- baseline -------------------------------------------------------------------

struct BaselineArgs {
  std::string name;
  std::string events;
  std::string events_format = "jsonl";
  std::vector<std::string> params;
  std::string truth;
  std::string dataset;
};

json cmd_baseline(const Common& c, const BaselineArgs& a) {
  const auto d = read_dataset(a.events, a.events_format);
  auto params = key_values(a.params, "--param");
  if (c.seed) params["seed"] = std::to_string(*c.seed);
  const auto det = baselines::run_baseline(a.name, d, params);

  const auto dir = out_dir(c);
  std::vector<std::string> written{a.name + ".json"};
  write_text(dir / written[0], baselines::to_json(det));
  json j;
  if (!a.truth.empty()) {
    const auto gt = read_truth(a.truth);
    const auto r = det.kind == baselines::DetectionResult::Kind::partition
                       ? evaluate(det.partition, gt)
                       : evaluate_flagged(det.flagged, d.users, gt);
    write_text(dir / (a.name + ".evaluation.json"), evaluation_json(r, gt.unlabeled(d.users)));
    write_text(dir / (a.name + ".scores.csv"), score_row(det.method_name, a.dataset.empty() ? "dataset" : a.dataset, r));
    written.push_back(a.name + ".evaluation.json");
    written.push_back(a.name + ".scores.csv");
    j["scores"] = scores_json(r);
  }
  auto out = artifact_report(dir, written);
  out["method"] = det.method_name;
  if (det.kind == baselines::DetectionResult::Kind::flagged_set) out["flagged"] = det.flagged.size();
  else out["communities"] = det.partition.community_count();
  if (j.contains("scores")) out["scores"] = j["scores"];
  return out;
}

// --- rank / random-labeler ------------------------------------------------------------

struct RankArgs {
  std::vector<std::string> files;
  std::string metric = "f1_star";
  bool lower_is_better = false;
};

json cmd_rank(const Common& c, const RankArgs& a) {
  ScoreTable table;
  for (const auto& f : a.files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + f);
    read_scores_csv(in, a.metric, table);
  }
  const auto ranks = rank_methods(table, !a.lower_is_better);
  const auto dir = out_dir(c);
  std::ostringstream s;
  write_ranks_csv(s, ranks);
  write_text(dir / "ranks.csv", s.str());
  auto j = artifact_report(dir, {"ranks.csv"});
  j["metric"] = a.metric;
  j["average_rank"] = json::object();
  for (const auto& [m, r] : ranks) j["average_rank"][m] = r;
  return j;
}

struct LabelerArgs {
  std::size_t users = 46;
  std::size_t positives = 6;
  std::size_t clusters = 2;
  std::size_t reps = 1000;
  unsigned threads = 1;
};

json cmd_random_labeler(const Common& c, const LabelerArgs& a) {
  if (a.positives > a.users) throw ValidationError("--positives exceeds --users");
  if (a.clusters == 0 || a.reps == 0 || a.threads == 0) throw ValidationError("--clusters, --reps and --threads must be >= 1");
  const auto s = random_labeler(a.users, a.positives, a.clusters, a.reps, c.seed.value_or(0), a.threads);
  auto interval = [](const Interval& i) { return json{{"mean", i.mean}, {"lo", i.lo}, {"hi", i.hi}}; };
  json j;
  j["reps"] = s.reps;
  j["clusters"] = s.n_clusters;
  j["weighted_precision"] = interval(s.weighted_precision);
  j["f1_star"] = interval(s.f1_star);
  j["homogeneity"] = interval(s.homogeneity);
  if (!c.out.empty()) {
    write_text(fs::path(c.out) / "random_labeler.json", j.dump(2) + "\n");
    j["artifacts"] = {"random_labeler.json"};
  }
  return j;
}

// --- run --------------------------------------------------------------------------

json cmd_run(const Common& c, int& status) {
  const auto cfg = config_of(c, false);  // run_pipeline validates and reports into error.json
  const auto r = run_pipeline(cfg);
  status = r.status;
  if (r.status != kSuccess) {
    std::cerr << r.error;
    return json();
  }
  auto j = artifact_report(cfg.output_dir, r.artifacts);
  const auto eval = cfg.output_dir / "evaluation.json";
  if (fs::exists(eval)) j["scores"] = json::parse(read_text(eval));
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated-behavior detection on time-aware multiplex collaboration networks"};
  app.set_version_flag("--version", std::string(COORDNET_VERSION));
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  TuneArgs tune;
  LayerArgs layer;
  EvaluateArgs eval;
  BaselineArgs base;
  RankArgs rank;
  LabelerArgs labeler;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic campaign dataset");
  simulate->add_option("kinds", sim.kinds, "Pattern kind 1, 2 or 3; a comma list such as 1,3 gives one layer per kind")
      ->required();
  add_common(simulate, common, false);

  auto* tune_beta = app.add_subcommand("tune-beta", "Sweep the decay rate of every layer");
  tune_beta->add_option("--config", common.config, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
  tune_beta->add_option("--set", common.overrides, "Override a configuration value");
  tune_beta->add_option("--threads", common.threads, "Worker threads");
  tune_beta->add_option("--parametric", tune.parametric, "Sweep a u,v,multiplier edge list instead of event data")
      ->check(CLI::ExistingFile);
  tune_beta->add_option("--beta-min", tune.beta_min, "Grid start for --parametric");
  tune_beta->add_option("--beta-max", tune.beta_max, "Grid end for --parametric");
  tune_beta->add_option("--beta-step", tune.beta_step, "Grid step for --parametric");
  add_common(tune_beta, common, false);

  auto* build = app.add_subcommand("build-layers", "Build the layer graphs at the tuned decay rates");
  build->add_option("--beta", layer.betas, "layer=beta (grid units); default: betas.json in the output directory");
  add_common(build, common, true);

  auto* cluster = app.add_subcommand("cluster", "Cluster the multiplex network of built layers");
  add_common(cluster, common, true);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a partition or a detection against ground truth");
  auto* part_opt = evaluate_cmd->add_option("--partition", eval.partition, "user,community CSV")->check(CLI::ExistingFile);
  auto* det_opt = evaluate_cmd->add_option("--detection", eval.detection, "Baseline detection JSON")->check(CLI::ExistingFile);
  part_opt->excludes(det_opt);
  evaluate_cmd->add_option("--truth", eval.truth, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--events", eval.events, "Events file giving the user universe of a flagged set");
  evaluate_cmd->add_option("--events-format", eval.events_format)->check(CLI::IsMember({"jsonl", "csv"}));
  evaluate_cmd->add_option("--method", eval.method, "Also write scores.csv for this method name");
  evaluate_cmd->add_option("--dataset", eval.dataset, "Dataset name in scores.csv");
  add_common(evaluate_cmd, common, false);

  auto* baseline = app.add_subcommand("baseline", "Run a baseline detector");
  baseline->add_option("name", base.name, "Detector name")->required()->check(CLI::IsMember(baselines::baseline_names()));
  baseline->add_option("--events", base.events, "Events file")->required()->check(CLI::ExistingFile);
  baseline->add_option("--events-format", base.events_format)->check(CLI::IsMember({"jsonl", "csv"}));
  baseline->add_option("--param", base.params, "key=value detector parameter (interval, action_type, filtering, seed)");
  baseline->add_option("--truth", base.truth, "Score the detection against this ground truth")->check(CLI::ExistingFile);
  baseline->add_option("--dataset", base.dataset, "Dataset name in the score CSV");
  add_common(baseline, common, false);

  auto* rank_cmd = app.add_subcommand("rank", "Average rank of methods across datasets");
  rank_cmd->add_option("files", rank.files, "Score CSV files")->required()->check(CLI::ExistingFile);
  rank_cmd->add_option("--metric", rank.metric, "Score column")
      ->check(CLI::IsMember({"f1_star", "precision_star", "recall_star", "homogeneity", "weighted_precision",
                             "nmi_binarized"}));
  rank_cmd->add_flag("--lower-is-better", rank.lower_is_better);
  add_common(rank_cmd, common, false);

  auto* labeler_cmd = app.add_subcommand("random-labeler", "Score distribution of uniform random labelings");
  labeler_cmd->add_option("--users", labeler.users);
  labeler_cmd->add_option("--positives", labeler.positives);
  labeler_cmd->add_option("--clusters", labeler.clusters);
  labeler_cmd->add_option("--reps", labeler.reps);
  labeler_cmd->add_option("--threads", labeler.threads);
  add_common(labeler_cmd, common, false);

  auto* run = app.add_subcommand("run", "Run the whole pipeline from a configuration");
  add_common(run, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kValidationError;
  }

  std::string stage;
  try {
    int status = kSuccess;
    json j;
    if (simulate->parsed()) stage = "simulate", j = cmd_simulate(common, sim);
    else if (tune_beta->parsed()) {
      stage = "tune-beta";
      if (!tune.parametric.empty()) j = cmd_tune_parametric(common, tune);
      else if (!common.config.empty()) j = cmd_tune(common);
      else throw ValidationError("tune-beta needs --config or --parametric");
    } else if (build->parsed()) stage = "build-layers", j = cmd_build_layers(common, layer);
    else if (cluster->parsed()) stage = "cluster", j = cmd_cluster(common);
    else if (evaluate_cmd->parsed()) {
      stage = "evaluate";
      if (eval.partition.empty() && eval.detection.empty())
        throw ValidationError("evaluate needs --partition or --detection");
      j = cmd_evaluate(common, eval);
    } else if (baseline->parsed()) stage = "baseline", j = cmd_baseline(common, base);
    else if (rank_cmd->parsed()) stage = "rank", j = cmd_rank(common, rank);
    else if (labeler_cmd->parsed()) stage = "random-labeler", j = cmd_random_labeler(common, labeler);
    else if (run->parsed()) stage = "run", j = cmd_run(common, status);
    if (status == kSuccess) report(common, j);
    return status;
  } catch (const std::exception& e) {
    std::cerr << error_json(stage, e);
    return classify_error(e);
  }
}

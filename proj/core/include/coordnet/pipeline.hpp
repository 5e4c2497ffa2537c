#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coordnet/community.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/kernel.hpp"
#include "coordnet/layers.hpp"
#include "coordnet/metrics.hpp"

namespace coordnet {

struct ActionTypeConfig {
  std::string name;
  std::string content_field;  // empty: the shared content field
};

struct PipelineConfig {
  std::filesystem::path events;
  InputFormat format = InputFormat::jsonl;
  std::filesystem::path ground_truth;  // optional
  FieldMapping fields;
  std::vector<ActionTypeConfig> action_types;
  std::map<std::string, std::string> action_type_aliases;

  double eps = 1e-6;
  UnionMode union_mode = UnionMode::additive;
  double beta_min = 0.0;
  double beta_max = 10.0;
  double beta_step = 0.01;
  std::string time_unit = "seconds";  // seconds | minutes | hours

  double gamma = 1.0;
  double omega = 1.0;
  Method method = Method::leiden;
  std::uint64_t seed = 0;

  std::filesystem::path output_dir;
  std::vector<std::string> formats{"graphml", "csv"};  // layer exports; reports are always JSON
  unsigned threads = 1;

  /// ValidationError describing the first offending setting.
  void validate() const;
  double time_unit_seconds() const;
  std::vector<double> grid() const;
  /// Declared layer names after aliasing, in declaration order, unique.
  std::vector<std::string> layer_names() const;
};

/// Parses the JSON configuration. Relative paths are resolved against
/// `base_dir`. ValidationError on unknown keys or bad values.
PipelineConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
/// Applies `dotted.key=value` assignments to a JSON configuration text.
/// Values that parse as JSON are used as such, anything else as a string.
std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& assignments);
PipelineConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
/// Canonical JSON (sorted keys, absolute paths as given).
std::string config_to_json(const PipelineConfig& cfg);
/// FNV-1a 64 of config_to_json.
std::uint64_t config_hash(const PipelineConfig& cfg);

/// Default output directory: $COORDNET_OUT_DIR, else "coordnet-out".
std::filesystem::path default_output_dir();

Dataset load_events(const PipelineConfig& cfg);
GroundTruth load_truth(const PipelineConfig& cfg);

struct TunedLayer {
  std::string action_type;
  BetaSweepResult sweep;
};

struct TuneOutcome {
  std::vector<TunedLayer> layers;
  std::vector<std::string> warnings;  // layers skipped for lack of evidence
};

/// tune_beta per declared layer. Layers without coordination evidence are
/// skipped with a warning; UndefinedResult if none remains.
TuneOutcome tune_layers(const Dataset& d, const PipelineConfig& cfg);

/// Layer graph at each layer's selected beta (beta_star in grid units).
std::vector<LayerGraph> build_layers(const Dataset& d, const PipelineConfig& cfg,
                                     const std::map<std::string, double>& beta_star);

struct ClusterOutcome {
  Partition partition;
  MultisliceModularity modularity;
  std::vector<double> layer_modularity;  // monoplex Q of the partition per layer
};

ClusterOutcome cluster_layers(const std::vector<std::string>& universe, const std::vector<LayerGraph>& layers,
                              const PipelineConfig& cfg);

/// Artifact writers; each returns the paths it wrote, relative to `dir`.
std::vector<std::string> write_sweeps(const std::filesystem::path& dir, const std::vector<TunedLayer>& layers);
std::map<std::string, double> read_betas(const std::filesystem::path& dir);
std::vector<std::string> write_layers(const std::filesystem::path& dir, const std::vector<LayerGraph>& layers,
                                      const std::vector<std::string>& formats);
std::vector<LayerGraph> read_layers(const std::filesystem::path& dir, const std::vector<std::string>& universe,
                                    const std::vector<std::string>& names, const std::map<std::string, double>& betas,
                                    double time_unit_seconds);
std::vector<std::string> write_clusters(const std::filesystem::path& dir, const ClusterOutcome& c,
                                        const std::vector<LayerGraph>& layers);
std::string evaluation_json(const EvalReport& r, const std::vector<std::string>& unlabeled);
std::vector<std::string> write_evaluation(const std::filesystem::path& dir, const Partition& p, const GroundTruth& gt);

/// Exit statuses.
enum ExitCode : int { kSuccess = 0, kValidationError = 1, kRuntimeError = 2 };

/// Classifies an exception into an exit status and a stage-tagged error
/// JSON document.
ExitCode classify_error(const std::exception& e);
std::string error_json(const std::string& stage, const std::exception& e);

struct RunOutcome {
  ExitCode status = kSuccess;
  std::vector<std::string> artifacts;  // relative to the output directory
  std::string error;                   // error JSON when status != 0
};

/// Full run: load, tune, build, cluster, evaluate (when ground truth is
/// configured), manifest. On failure every artifact written by this run is
/// removed and `error.json` is written instead.
RunOutcome run_pipeline(const PipelineConfig& cfg);

}  // namespace coordnet

#pragma once

#include "flipforge/datagen.hpp"
#include "flipforge/heatmap.hpp"
#include "flipforge/metrics.hpp"
#include "flipforge/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flipforge {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kPipelineFormatVersion = "flipforge-pipeline-v1";
inline constexpr std::string_view kHeatmapIndexVersion = "flipforge-heatmaps-v1";

struct HeatmapParams {
  double sigma = kDefaultHeatmapSigma;
  double threshold = kDefaultPeakThreshold;
  double nms_radius = kDefaultNmsRadius;
};

void validate(const HeatmapParams &p);

enum class EvalTruth { Dataset, Simulation };

/// Everything `flipforge pipeline` needs. Seeds of the individual stages are
/// derived from `seed`, never stored here.
struct PipelineConfig {
  std::string format_version{kPipelineFormatVersion};
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> stages;
  std::optional<std::filesystem::path> input_frames;
  std::optional<std::filesystem::path> input_labels;
  SimConfig sim;
  std::optional<SampleMode> sample; // unset keeps every label
  GenConfig gen;
  HeatmapParams heatmap;
  std::optional<std::filesystem::path> heatmaps_dir;
  MatchConfig match;
  EvalTruth eval_truth = EvalTruth::Dataset;
  std::optional<double> eval_threshold;
  std::vector<double> sweep_rates;
};

/// Canonical stage order; a config lists any subset.
const std::vector<std::string> &pipeline_stages();

/// Seed of a named stage, derived from the top-level seed by label.
std::uint64_t stage_seed(std::uint64_t top_seed, std::string_view stage);

// JSON <-> config. Unknown keys are rejected with InvalidConfig.
SimConfig sim_config_from_json(const nlohmann::json &j, bool allow_seed = true);
nlohmann::json to_json(const SimConfig &cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json &j);
nlohmann::json to_json(const PipelineConfig &cfg);
GenConfig gen_config_from_json(const nlohmann::json &j, bool allow_seed = true);
nlohmann::json gen_config_json_without_seed(const GenConfig &cfg);

// Stage building blocks shared by the subcommands and the pipeline.

/// Writes `<out>/frames/t####.png` and `<out>/gt.json`.
SimResult write_simulation(const SimConfig &cfg, const std::filesystem::path &out);

/// Renders one HMAP per dataset pair into `out` (h%06d.hmap named by
/// source_t) plus an index.json sidecar. Returns the number of heatmaps.
std::size_t render_dataset(const std::filesystem::path &dataset_dir, double sigma,
                           const std::filesystem::path &out);

/// Peaks of every heatmap in `dir`, in source_t order.
std::vector<Detection> peaks_from_heatmaps(const std::filesystem::path &dir,
                                           double threshold, double nms_radius);

MetricsReport evaluate(const AnnotationSet &gt, std::span<const Detection> det,
                       const MatchConfig &cfg, std::optional<double> threshold);

/// Runs the configured stages under `out` and returns the summary that is also
/// written to `<out>/summary.json`. Stage failures are rethrown with the
/// stage name prefixed to the message.
nlohmann::json run_pipeline(const PipelineConfig &cfg, const std::filesystem::path &out);

/// Entry point of the `flipforge` executable. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 I/O error.
int run_cli(int argc, char **argv);
int run_cli(const std::vector<std::string> &args);

} // namespace flipforge

#include "flipforge/error.hpp"
#include "flipforge/pipeline.hpp"
#include "flipforge/rng.hpp"

#include <algorithm>
#include <initializer_list>

namespace flipforge {

using nlohmann::json;

namespace {

void require_object(const json &j, std::string_view context) {
  if (!j.is_object())
    throw Error(ErrorCode::InvalidConfig, std::string(context) + " must be a JSON object");
}

void reject_unknown_keys(const json &j, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  require_object(j, context);
  for (const auto &[key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::InvalidConfig,
                  "unknown key \"" + key + "\" in " + std::string(context));
  }
}

template <typename T>
void read(const json &j, const char *key, T &dst, std::string_view context) {
  if (!j.contains(key))
    return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorCode::InvalidConfig, std::string(context) + "." + key +
                                              " has the wrong type");
  }
}

} // namespace

const std::vector<std::string> &pipeline_stages() {
  static const std::vector<std::string> stages = {
      "simulate", "sample-labels", "generate", "sweep", "render", "peaks", "evaluate"};
  return stages;
}

std::uint64_t stage_seed(std::uint64_t top_seed, std::string_view stage) {
  return derive_seed(top_seed, "stage:" + std::string(stage));
}

void validate(const HeatmapParams &p) {
  if (!(p.sigma > 0.0))
    throw Error(ErrorCode::InvalidConfig, "heatmap sigma must be positive");
  if (!(p.threshold > 0.0 && p.threshold < 1.0))
    throw Error(ErrorCode::InvalidConfig, "peak threshold must lie in (0, 1)");
  if (!(p.nms_radius >= 1.0))
    throw Error(ErrorCode::InvalidConfig, "nms radius must be >= 1");
}

SimConfig sim_config_from_json(const json &j, bool allow_seed) {
  const std::string_view ctx = "simulate";
  if (allow_seed)
    reject_unknown_keys(j, {"width", "height", "n_frames", "n_cells", "blob_sigma",
                            "drift_sigma", "division_rate", "split_distance",
                            "noise_sigma", "seed"},
                        ctx);
  else
    reject_unknown_keys(j, {"width", "height", "n_frames", "n_cells", "blob_sigma",
                            "drift_sigma", "division_rate", "split_distance",
                            "noise_sigma"},
                        ctx);
  SimConfig cfg;
  read(j, "width", cfg.width, ctx);
  read(j, "height", cfg.height, ctx);
  read(j, "n_frames", cfg.n_frames, ctx);
  read(j, "n_cells", cfg.n_cells, ctx);
  read(j, "blob_sigma", cfg.blob_sigma, ctx);
  read(j, "drift_sigma", cfg.drift_sigma, ctx);
  read(j, "division_rate", cfg.division_rate, ctx);
  read(j, "split_distance", cfg.split_distance, ctx);
  read(j, "noise_sigma", cfg.noise_sigma, ctx);
  read(j, "seed", cfg.seed, ctx);
  validate(cfg);
  return cfg;
}

json to_json(const SimConfig &cfg) {
  return {{"width", cfg.width},
          {"height", cfg.height},
          {"n_frames", cfg.n_frames},
          {"n_cells", cfg.n_cells},
          {"blob_sigma", cfg.blob_sigma},
          {"drift_sigma", cfg.drift_sigma},
          {"division_rate", cfg.division_rate},
          {"split_distance", cfg.split_distance},
          {"noise_sigma", cfg.noise_sigma},
          {"seed", cfg.seed}};
}

GenConfig gen_config_from_json(const json &g, bool allow_seed) {
  const std::string_view ctx = "generate";
  if (allow_seed)
    reject_unknown_keys(g, {"crop_size", "k_min", "k_max", "mask_sigma_min",
                            "mask_sigma_max", "mask_disk_radius", "paste_mode",
                            "max_place_attempts", "seed"},
                        ctx);
  else
    reject_unknown_keys(g, {"crop_size", "k_min", "k_max", "mask_sigma_min",
                            "mask_sigma_max", "mask_disk_radius", "paste_mode",
                            "max_place_attempts"},
                        ctx);
  GenConfig cfg;
  read(g, "crop_size", cfg.crop_size, ctx);
  read(g, "k_min", cfg.k_min, ctx);
  read(g, "k_max", cfg.k_max, ctx);
  read(g, "mask_sigma_min", cfg.mask_sigma_min, ctx);
  read(g, "mask_sigma_max", cfg.mask_sigma_max, ctx);
  if (g.contains("mask_disk_radius")) {
    double r = 0.0;
    read(g, "mask_disk_radius", r, ctx);
    cfg.mask_disk_radius = r;
  }
  std::string mode{to_string(cfg.paste_mode)};
  read(g, "paste_mode", mode, ctx);
  cfg.paste_mode = paste_mode_from_string(mode);
  read(g, "max_place_attempts", cfg.max_place_attempts, ctx);
  read(g, "seed", cfg.seed, ctx);
  return cfg;
}

json gen_config_json_without_seed(const GenConfig &cfg) {
  json j = to_json(cfg);
  j.erase("seed");
  return j;
}

PipelineConfig pipeline_config_from_json(const json &j) {
  reject_unknown_keys(j, {"format_version", "seed", "threads", "stages", "inputs",
                          "simulate", "sample", "generate", "heatmap", "evaluate",
                          "sweep"},
                      "pipeline config");
  PipelineConfig cfg;
  read(j, "format_version", cfg.format_version, "pipeline config");
  if (cfg.format_version != kPipelineFormatVersion)
    throw Error(ErrorCode::InvalidConfig,
                "pipeline format_version must be " + std::string(kPipelineFormatVersion));
  read(j, "seed", cfg.seed, "pipeline config");
  read(j, "threads", cfg.threads, "pipeline config");

  read(j, "stages", cfg.stages, "pipeline config");
  if (!j.contains("stages"))
    cfg.stages = {"simulate", "sample-labels", "generate", "render", "peaks", "evaluate"};
  for (const auto &s : cfg.stages) {
    const auto &known = pipeline_stages();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw Error(ErrorCode::InvalidConfig, "unknown stage \"" + s + "\"");
  }

  if (j.contains("inputs")) {
    const json &in = j["inputs"];
    reject_unknown_keys(in, {"frames", "labels"}, "inputs");
    std::string frames, labels;
    read(in, "frames", frames, "inputs");
    read(in, "labels", labels, "inputs");
    if (!frames.empty())
      cfg.input_frames = frames;
    if (!labels.empty())
      cfg.input_labels = labels;
  }

  if (j.contains("simulate"))
    cfg.sim = sim_config_from_json(j["simulate"], /*allow_seed=*/false);

  if (j.contains("sample")) {
    const json &s = j["sample"];
    reject_unknown_keys(s, {"mode", "n", "rate"}, "sample");
    std::string mode = "n_shot";
    read(s, "mode", mode, "sample");
    if (mode == "n_shot") {
      std::size_t n = 5;
      read(s, "n", n, "sample");
      if (n < 1)
        throw Error(ErrorCode::InvalidConfig, "sample.n must be >= 1");
      cfg.sample = SampleMode::n_shot(n);
    } else if (mode == "missing_rate") {
      double r = 0.0;
      read(s, "rate", r, "sample");
      if (!(r >= 0.0 && r <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "sample.rate must lie in [0, 1]");
      cfg.sample = SampleMode::missing_rate(r);
    } else if (mode != "all") {
      throw Error(ErrorCode::InvalidConfig,
                  "sample.mode must be n_shot, missing_rate or all");
    }
  }

  if (j.contains("generate"))
    cfg.gen = gen_config_from_json(j["generate"], /*allow_seed=*/false);
  validate(cfg.gen);

  if (j.contains("heatmap")) {
    const json &h = j["heatmap"];
    reject_unknown_keys(h, {"sigma", "threshold", "nms_radius", "heatmaps_dir"},
                        "heatmap");
    read(h, "sigma", cfg.heatmap.sigma, "heatmap");
    read(h, "threshold", cfg.heatmap.threshold, "heatmap");
    read(h, "nms_radius", cfg.heatmap.nms_radius, "heatmap");
    std::string dir;
    read(h, "heatmaps_dir", dir, "heatmap");
    if (!dir.empty())
      cfg.heatmaps_dir = dir;
  }
  validate(cfg.heatmap);

  if (j.contains("evaluate")) {
    const json &e = j["evaluate"];
    reject_unknown_keys(e, {"spatial_tol", "temporal_tol", "gt", "threshold"},
                        "evaluate");
    read(e, "spatial_tol", cfg.match.spatial_tol, "evaluate");
    read(e, "temporal_tol", cfg.match.temporal_tol, "evaluate");
    std::string gt = "dataset";
    read(e, "gt", gt, "evaluate");
    if (gt == "dataset")
      cfg.eval_truth = EvalTruth::Dataset;
    else if (gt == "simulation")
      cfg.eval_truth = EvalTruth::Simulation;
    else
      throw Error(ErrorCode::InvalidConfig, "evaluate.gt must be dataset or simulation");
    if (e.contains("threshold") && !e["threshold"].is_null()) {
      double th = 0.0;
      read(e, "threshold", th, "evaluate");
      cfg.eval_threshold = th;
    }
  }
  validate(cfg.match);

  if (j.contains("sweep")) {
    const json &s = j["sweep"];
    reject_unknown_keys(s, {"missing_rates"}, "sweep");
    read(s, "missing_rates", cfg.sweep_rates, "sweep");
    for (double r : cfg.sweep_rates)
      if (!(r >= 0.0 && r <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "sweep rates must lie in [0, 1]");
  }
  return cfg;
}

json to_json(const PipelineConfig &cfg) {
  json j;
  j["format_version"] = cfg.format_version;
  j["seed"] = cfg.seed;
  j["stages"] = cfg.stages;
  if (cfg.input_frames || cfg.input_labels) {
    j["inputs"] = json::object();
    if (cfg.input_frames)
      j["inputs"]["frames"] = cfg.input_frames->string();
    if (cfg.input_labels)
      j["inputs"]["labels"] = cfg.input_labels->string();
  }
  json sim = to_json(cfg.sim);
  sim.erase("seed");
  j["simulate"] = std::move(sim);
  if (!cfg.sample)
    j["sample"] = {{"mode", "all"}};
  else if (cfg.sample->kind == SampleMode::Kind::NShot)
    j["sample"] = {{"mode", "n_shot"}, {"n", cfg.sample->n}};
  else
    j["sample"] = {{"mode", "missing_rate"}, {"rate", cfg.sample->rate}};
  j["generate"] = gen_config_json_without_seed(cfg.gen);
  j["heatmap"] = {{"sigma", cfg.heatmap.sigma},
                  {"threshold", cfg.heatmap.threshold},
                  {"nms_radius", cfg.heatmap.nms_radius}};
  if (cfg.heatmaps_dir)
    j["heatmap"]["heatmaps_dir"] = cfg.heatmaps_dir->string();
  j["evaluate"] = {{"spatial_tol", cfg.match.spatial_tol},
                   {"temporal_tol", cfg.match.temporal_tol},
                   {"gt", cfg.eval_truth == EvalTruth::Dataset ? "dataset" : "simulation"},
                   {"threshold", cfg.eval_threshold ? json(*cfg.eval_threshold) : json()}};
  j["sweep"] = {{"missing_rates", cfg.sweep_rates}};
  return j;
}

} // namespace flipforge

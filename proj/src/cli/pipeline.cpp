#include "flipforge/error.hpp"
#include "flipforge/pipeline.hpp"
#include "flipforge/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <regex>

namespace flipforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string heatmap_file_name(std::uint32_t source_t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "h%06u.hmap", source_t);
  return buf;
}

json read_json_file(const fs::path &path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::MalformedAnnotations, path.string() + ": " + e.what());
  }
}

bool has_stage(const PipelineConfig &cfg, std::string_view name) {
  return std::find(cfg.stages.begin(), cfg.stages.end(), name) != cfg.stages.end();
}

std::size_t count_dataset_events(const json &manifest) {
  std::size_t n = 0;
  for (const auto &p : manifest.at("pairs"))
    n += p.at("n_events").get<std::size_t>();
  return n;
}

// Runs `fn`, prefixing any flipforge::Error message with the stage name.
template <typename Fn> void run_stage(std::string_view stage, Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    throw Error(e.code(), "[" + std::string(stage) + "] " + e.what());
  } catch (const std::exception &e) {
    throw Error(ErrorCode::Io, "[" + std::string(stage) + "] " + e.what());
  }
}

// render -> peaks -> evaluate on a dataset's own pasted events.
MetricsReport oracle_closure(const fs::path &dataset_dir, const fs::path &heatmap_dir,
                             const PipelineConfig &cfg) {
  render_dataset(dataset_dir, cfg.heatmap.sigma, heatmap_dir);
  const auto det =
      peaks_from_heatmaps(heatmap_dir, cfg.heatmap.threshold, cfg.heatmap.nms_radius);
  return evaluate(load_dataset_events(dataset_dir), det, cfg.match, cfg.eval_threshold);
}

} // namespace

SimResult write_simulation(const SimConfig &cfg, const fs::path &out) {
  SimResult res = simulate(cfg);
  save_sequence(res.sequence, out / "frames");
  save_annotations(res.ground_truth, out / "gt.json");
  return res;
}

std::size_t render_dataset(const fs::path &dataset_dir, double sigma,
                           const fs::path &out) {
  const json manifest = read_json_file(dataset_dir / "manifest.json");
  if (manifest.value("format_version", "") != kDatasetFormatVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "dataset is not " + std::string(kDatasetFormatVersion));
  std::uint32_t width = 0, height = 0;
  try {
    width = manifest.at("sequence").at("width").get<std::uint32_t>();
    height = manifest.at("sequence").at("height").get<std::uint32_t>();
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedAnnotations, std::string("manifest: ") + e.what());
  }

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create " + out.string());

  json index = json::array();
  std::size_t count = 0;
  for (const auto &entry : manifest.at("pairs")) {
    const json ev = read_json_file(dataset_dir / entry.at("path").get<std::string>() /
                                   "events.json");
    std::vector<Point2> points;
    for (const auto &p : ev.at("events"))
      points.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
    const auto t = ev.at("source_t").get<std::uint32_t>();
    const Heatmap h = render_targets(points, width, height, sigma);
    save_heatmap(h, out / heatmap_file_name(t));
    index.push_back({{"file", heatmap_file_name(t)}, {"source_t", t}});
    ++count;
  }
  const json doc = {{"format_version", std::string(kHeatmapIndexVersion)},
                    {"sigma", sigma},
                    {"heatmaps", std::move(index)}};
  write_text_file(out / "index.json", doc.dump(2) + "\n");
  return count;
}

std::vector<Detection> peaks_from_heatmaps(const fs::path &dir, double threshold,
                                           double nms_radius) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::MissingDirectory, "heatmap directory not found: " + dir.string());

  // source_t -> file. The index sidecar wins; otherwise the file number is t.
  std::map<std::uint32_t, fs::path> files;
  if (fs::exists(dir / "index.json")) {
    const json index = read_json_file(dir / "index.json");
    if (index.value("format_version", "") != kHeatmapIndexVersion)
      throw Error(ErrorCode::UnsupportedVersion,
                  "heatmap index is not " + std::string(kHeatmapIndexVersion));
    try {
      for (const auto &e : index.at("heatmaps"))
        files[e.at("source_t").get<std::uint32_t>()] = dir / e.at("file").get<std::string>();
    } catch (const json::exception &e) {
      throw Error(ErrorCode::MalformedAnnotations, std::string("index.json: ") + e.what());
    }
  } else {
    static const std::regex pattern(R"(h(\d+)\.hmap)");
    for (const auto &entry : fs::directory_iterator(dir)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (std::regex_match(name, m, pattern))
        files[static_cast<std::uint32_t>(std::stoul(m[1].str()))] = entry.path();
    }
  }

  std::vector<Detection> all;
  for (const auto &[t, path] : files) {
    const auto det = extract_peaks(load_heatmap(path), threshold, nms_radius, t);
    all.insert(all.end(), det.begin(), det.end());
  }
  return all;
}

MetricsReport evaluate(const AnnotationSet &gt, std::span<const Detection> det,
                       const MatchConfig &cfg, std::optional<double> threshold) {
  validate(cfg);
  if (!threshold)
    return score(match(gt.events, det, cfg));
  const double th[] = {*threshold};
  return sweep(gt.events, det, cfg, th).front().report;
}

json run_pipeline(const PipelineConfig &cfg, const fs::path &out) {
  validate(cfg.gen);
  validate(cfg.heatmap);
  validate(cfg.match);

  json seeds = json::object();
  for (const auto &stage : pipeline_stages())
    seeds[stage] = stage_seed(cfg.seed, stage);

  json summary = {{"format_version", std::string(kPipelineFormatVersion)},
                  {"tool_version", std::string(kToolVersion)},
                  {"config", to_json(cfg)},
                  {"seeds", seeds},
                  {"stages", json::array()}};

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create " + out.string());

  std::optional<Sequence> seq;
  std::optional<AnnotationSet> full_labels;
  std::optional<AnnotationSet> labels;
  std::vector<Detection> detections;
  const fs::path dataset_dir = out / "dataset";
  const fs::path heatmap_dir = cfg.heatmaps_dir ? *cfg.heatmaps_dir : out / "heatmaps";

  // Explicit inputs stand in for the simulation stage.
  if (!has_stage(cfg, "simulate")) {
    run_stage("inputs", [&] {
      if (cfg.input_frames)
        seq = load_sequence(*cfg.input_frames);
      if (cfg.input_labels)
        full_labels = load_annotations(*cfg.input_labels);
    });
    if (!has_stage(cfg, "sample-labels"))
      labels = full_labels;
  }

  // Stages always run in canonical order; the config picks which ones.
  for (const auto &stage : pipeline_stages()) {
    if (!has_stage(cfg, stage))
      continue;
    json record = {{"name", stage}, {"seed", seeds[stage]}};

    run_stage(stage, [&] {
      if (stage == "simulate") {
        SimConfig sim = cfg.sim;
        sim.seed = stage_seed(cfg.seed, "simulate");
        const SimResult res = write_simulation(sim, out / "sim");
        record["n_frames"] = res.sequence.size();
        record["n_events"] = res.ground_truth.size();
      } else if (stage == "sample-labels") {
        if (!full_labels)
          throw Error(ErrorCode::InvalidConfig, "no labels to sample from");
        labels = cfg.sample ? sample_partial_labels(*full_labels, *cfg.sample,
                                                    stage_seed(cfg.seed, stage))
                            : *full_labels;
        save_annotations(*labels, out / "labels.json");
        record["n_input"] = full_labels->size();
        record["n_kept"] = labels->size();
      } else if (stage == "generate") {
        if (!seq || !labels)
          throw Error(ErrorCode::InvalidConfig, "generate needs frames and labels");
        GenConfig gen = cfg.gen;
        gen.seed = stage_seed(cfg.seed, "generate");
        const json manifest =
            generate_dataset(*seq, *labels, gen, dataset_dir, {cfg.threads});
        record["n_pairs"] = manifest["pairs"].size();
        record["bank_size"] = manifest["bank"]["size"];
        record["n_pasted_events"] = count_dataset_events(manifest);
      } else if (stage == "sweep") {
        if (!seq || !full_labels)
          throw Error(ErrorCode::InvalidConfig, "sweep needs frames and labels");
        json rows = json::array();
        GenConfig gen = cfg.gen;
        gen.seed = stage_seed(cfg.seed, "generate");
        const bool closure = has_stage(cfg, "render") && has_stage(cfg, "peaks") &&
                             has_stage(cfg, "evaluate");
        for (std::size_t i = 0; i < cfg.sweep_rates.size(); ++i) {
          const double rate = cfg.sweep_rates[i];
          const fs::path dir = out / "sweep" / ("rate_" + std::to_string(i));
          const AnnotationSet kept = sample_partial_labels(
              *full_labels, SampleMode::missing_rate(rate),
              derive_seed(stage_seed(cfg.seed, "sweep"), "rate", i));
          save_annotations(kept, dir / "labels.json");
          json row = {{"rate", rate},
                      {"n_labels", full_labels->size()},
                      {"n_kept", kept.size()}};
          if (build_crop_bank(*seq, kept, gen.crop_size).empty()) {
            row["generated"] = false;
          } else {
            const json manifest =
                generate_dataset(*seq, kept, gen, dir / "dataset", {cfg.threads});
            row["generated"] = true;
            row["bank_size"] = manifest["bank"]["size"];
            row["n_pairs"] = manifest["pairs"].size();
            row["n_pasted_events"] = count_dataset_events(manifest);
            if (closure)
              row["report"] = to_json(
                  oracle_closure(dir / "dataset", dir / "heatmaps", cfg));
          }
          rows.push_back(std::move(row));
        }
        summary["sweep"] = rows;
        record["n_rows"] = rows.size();
      } else if (stage == "render") {
        record["n_heatmaps"] = render_dataset(dataset_dir, cfg.heatmap.sigma, heatmap_dir);
      } else if (stage == "peaks") {
        detections = peaks_from_heatmaps(heatmap_dir, cfg.heatmap.threshold,
                                         cfg.heatmap.nms_radius);
        write_text_file(out / "detections.json",
                        detections_to_json(detections).dump(2) + "\n");
        record["n_detections"] = detections.size();
      } else if (stage == "evaluate") {
        AnnotationSet gt;
        if (cfg.eval_truth == EvalTruth::Dataset) {
          gt = load_dataset_events(dataset_dir);
          save_annotations(gt, out / "dataset_gt.json");
        } else {
          if (!full_labels)
            throw Error(ErrorCode::InvalidConfig, "no simulation ground truth available");
          gt = *full_labels;
        }
        const MetricsReport report = evaluate(gt, detections, cfg.match, cfg.eval_threshold);
        write_text_file(out / "report.json", to_json(report).dump(2) + "\n");
        summary["report"] = to_json(report);
      }
    });

    // Later stages read what earlier ones wrote, exactly as the subcommands do.
    if (stage == "simulate") {
      run_stage(stage, [&] {
        seq = load_sequence(out / "sim" / "frames");
        full_labels = load_annotations(out / "sim" / "gt.json");
      });
      if (!has_stage(cfg, "sample-labels"))
        labels = full_labels;
    }
    summary["stages"].push_back(std::move(record));
  }

  write_text_file(out / "summary.json", summary.dump(2) + "\n");
  return summary;
}

} // namespace flipforge

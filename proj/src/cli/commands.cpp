#include "flipforge/error.hpp"
#include "flipforge/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace flipforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

json read_config(const std::string &path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
  }
}

std::string version_text() {
  return "flipforge " + std::string(kToolVersion) + "\n" +
         "dataset format: " + std::string(kDatasetFormatVersion) + "\n" +
         "heatmap format: HMAP v" + std::to_string(kHmapVersion) + " (index " +
         std::string(kHeatmapIndexVersion) + ")\n" +
         "pipeline config: " + std::string(kPipelineFormatVersion) + "\n";
}

} // namespace

int run_cli(int argc, char **argv) {
  CLI::App app{"flipforge: mitosis-detection dataset generation from partial labels"};
  app.require_subcommand(0, 1);
  // Top-level flags such as --threads may also follow the subcommand.
  app.fallthrough();

  bool show_version = false;
  unsigned threads = 0;
  app.add_flag("--version", show_version, "Print tool and format versions");
  app.add_option("--threads", threads, "Worker threads (0 = available parallelism)");

  // simulate
  auto *sim_cmd = app.add_subcommand("simulate", "Render a synthetic time-lapse with ground truth");
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  sim_cmd->add_option("--config", sim_config, "Simulation config JSON")->required();
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();
  sim_cmd->add_option("--seed", sim_seed, "Override the config seed");

  // sample-labels
  auto *sample_cmd = app.add_subcommand("sample-labels", "Subsample an annotation set");
  std::string sample_labels, sample_out;
  std::optional<std::size_t> n_shot;
  std::optional<double> missing_rate;
  std::uint64_t sample_seed = 0;
  sample_cmd->add_option("--labels", sample_labels, "Annotation JSON")->required();
  auto *n_opt = sample_cmd->add_option("--n-shot", n_shot, "Keep n events")
                    ->check(CLI::PositiveNumber);
  auto *r_opt = sample_cmd->add_option("--missing-rate", missing_rate,
                                       "Drop each event with this probability")
                    ->check(CLI::Range(0.0, 1.0));
  n_opt->excludes(r_opt);
  sample_cmd->add_option("--seed", sample_seed, "Sampling seed")->required();
  sample_cmd->add_option("--out", sample_out, "Output annotation JSON")->required();

  // generate
  auto *gen_cmd = app.add_subcommand("generate", "Generate a labeled pair dataset");
  std::string gen_frames, gen_labels, gen_out, gen_config, paste_mode;
  GenConfig gen;
  std::optional<std::uint32_t> crop_size, k_min, k_max, max_attempts;
  std::optional<double> sigma_min, sigma_max, disk_radius;
  std::optional<std::uint64_t> gen_seed;
  gen_cmd->add_option("--frames", gen_frames, "Frame directory (t####.png)")->required();
  gen_cmd->add_option("--labels", gen_labels, "Partial annotation JSON")->required();
  gen_cmd->add_option("--out", gen_out, "Output dataset directory")->required();
  gen_cmd->add_option("--config", gen_config, "JSON with generation settings");
  gen_cmd->add_option("--crop-size", crop_size, "Crop size in pixels (default 40)");
  gen_cmd->add_option("--k-min", k_min, "Minimum pastes per pair (default 1)");
  gen_cmd->add_option("--k-max", k_max, "Maximum pastes per pair (default 10)");
  gen_cmd->add_option("--sigma-min", sigma_min, "Minimum mask blur sigma (default 2)");
  gen_cmd->add_option("--sigma-max", sigma_max, "Maximum mask blur sigma (default 8)");
  gen_cmd->add_option("--disk-radius", disk_radius, "Mask disk radius (default s/4)");
  gen_cmd->add_option("--max-place-attempts", max_attempts, "Placement attempts per paste");
  gen_cmd->add_option("--paste-mode", paste_mode, "alpha or direct")
      ->check(CLI::IsMember({"alpha", "direct"}));
  gen_cmd->add_option("--seed", gen_seed, "Dataset seed");

  // render
  auto *render_cmd = app.add_subcommand("render", "Render ground-truth heatmaps for a dataset");
  std::string render_dataset_dir, render_out;
  double render_sigma = kDefaultHeatmapSigma;
  render_cmd->add_option("--dataset", render_dataset_dir, "Dataset directory")->required();
  render_cmd->add_option("--sigma", render_sigma, "Heatmap sigma (default 6)")
      ->check(CLI::PositiveNumber);
  render_cmd->add_option("--out", render_out, "Heatmap output directory")->required();

  // peaks
  auto *peaks_cmd = app.add_subcommand("peaks", "Extract detections from heatmaps");
  std::string peaks_dir, peaks_out;
  HeatmapParams peak_params;
  peaks_cmd->add_option("--heatmaps", peaks_dir, "Heatmap directory")->required();
  peaks_cmd->add_option("--threshold", peak_params.threshold, "Peak threshold (default 0.3)");
  peaks_cmd->add_option("--nms-radius", peak_params.nms_radius, "Suppression radius (default 4)");
  peaks_cmd->add_option("--out", peaks_out, "detections.json path")->required();

  // evaluate
  auto *eval_cmd = app.add_subcommand("evaluate", "Score detections against ground truth");
  std::string eval_gt, eval_det;
  MatchConfig match_cfg;
  std::optional<double> eval_threshold;
  eval_cmd->add_option("--gt", eval_gt, "Annotation JSON or dataset directory")->required();
  eval_cmd->add_option("--det", eval_det, "detections.json")->required();
  eval_cmd->add_option("--spatial-tol", match_cfg.spatial_tol, "Pixels (default 15)");
  eval_cmd->add_option("--temporal-tol", match_cfg.temporal_tol, "Frames (default 6)");
  eval_cmd->add_option("--threshold", eval_threshold, "Minimum detection score");

  // pipeline
  auto *pipe_cmd = app.add_subcommand("pipeline", "Run the configured stages end to end");
  std::string pipe_config, pipe_out;
  std::optional<std::uint64_t> pipe_seed;
  pipe_cmd->add_option("--config", pipe_config, "Pipeline config JSON")->required();
  pipe_cmd->add_option("--out", pipe_out, "Artifact directory")->required();
  pipe_cmd->add_option("--seed", pipe_seed, "Override the top-level seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (show_version) {
    std::cout << version_text();
    return kExitOk;
  }

  try {
    if (sim_cmd->parsed()) {
      SimConfig cfg = sim_config_from_json(read_config(sim_config));
      if (sim_seed)
        cfg.seed = *sim_seed;
      const SimResult res = write_simulation(cfg, sim_out);
      std::cout << json{{"n_frames", res.sequence.size()},
                        {"n_events", res.ground_truth.size()},
                        {"seed", cfg.seed}}
                       .dump()
                << "\n";
    } else if (sample_cmd->parsed()) {
      if (!n_shot && !missing_rate)
        throw Error(ErrorCode::InvalidConfig, "pass one of --n-shot or --missing-rate");
      const AnnotationSet labels = load_annotations(sample_labels);
      const SampleMode mode = n_shot ? SampleMode::n_shot(*n_shot)
                                     : SampleMode::missing_rate(*missing_rate);
      const AnnotationSet kept = sample_partial_labels(labels, mode, sample_seed);
      save_annotations(kept, sample_out);
      std::cout << json{{"n_input", labels.size()}, {"n_kept", kept.size()}}.dump() << "\n";
    } else if (gen_cmd->parsed()) {
      if (!gen_config.empty())
        gen = gen_config_from_json(read_config(gen_config));
      // Flags win over the config file.
      if (crop_size) gen.crop_size = *crop_size;
      if (k_min) gen.k_min = *k_min;
      if (k_max) gen.k_max = *k_max;
      if (sigma_min) gen.mask_sigma_min = *sigma_min;
      if (sigma_max) gen.mask_sigma_max = *sigma_max;
      if (disk_radius) gen.mask_disk_radius = *disk_radius;
      if (max_attempts) gen.max_place_attempts = *max_attempts;
      if (!paste_mode.empty()) gen.paste_mode = paste_mode_from_string(paste_mode);
      if (gen_seed) gen.seed = *gen_seed;
      validate(gen);
      const Sequence seq = load_sequence(gen_frames);
      const AnnotationSet labels = load_annotations(gen_labels);
      const json manifest = generate_dataset(seq, labels, gen, gen_out, {threads});
      std::cout << json{{"n_pairs", manifest["pairs"].size()},
                        {"bank_size", manifest["bank"]["size"]}}
                       .dump()
                << "\n";
    } else if (render_cmd->parsed()) {
      const auto n = render_dataset(render_dataset_dir, render_sigma, render_out);
      std::cout << json{{"n_heatmaps", n}}.dump() << "\n";
    } else if (peaks_cmd->parsed()) {
      validate(peak_params);
      const auto det =
          peaks_from_heatmaps(peaks_dir, peak_params.threshold, peak_params.nms_radius);
      write_text_file(peaks_out, detections_to_json(det).dump(2) + "\n");
      std::cout << json{{"n_detections", det.size()}}.dump() << "\n";
    } else if (eval_cmd->parsed()) {
      validate(match_cfg);
      const AnnotationSet gt = fs::is_directory(eval_gt) ? load_dataset_events(eval_gt)
                                                         : load_annotations(eval_gt);
      json det_doc;
      try {
        det_doc = json::parse(read_text_file(eval_det));
      } catch (const json::parse_error &e) {
        throw Error(ErrorCode::MalformedAnnotations, eval_det + ": " + e.what());
      }
      const auto det = detections_from_json(det_doc);
      std::cout << to_json(evaluate(gt, det, match_cfg, eval_threshold)).dump() << "\n";
    } else if (pipe_cmd->parsed()) {
      PipelineConfig cfg = pipeline_config_from_json(read_config(pipe_config));
      if (pipe_seed)
        cfg.seed = *pipe_seed;
      if (threads)
        cfg.threads = threads;
      const json summary = run_pipeline(cfg, pipe_out);
      json brief = {{"seeds", summary["seeds"]}};
      if (summary.contains("report"))
        brief["report"] = summary["report"];
      std::cout << brief.dump() << "\n";
    } else {
      std::cerr << app.help();
      return kExitUsage;
    }
  } catch (const Error &e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    switch (e.kind()) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Data: return kExitData;
    case ErrorKind::Io: return kExitIo;
    }
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string> &args) {
  std::vector<std::string> storage = args;
  std::vector<char *> argv;
  for (auto &s : storage)
    argv.push_back(s.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(storage.size()), argv.data());
}

} // namespace flipforge

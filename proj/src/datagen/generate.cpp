#include "flipforge/datagen.hpp"
#include "flipforge/error.hpp"
#include "flipforge/rng.hpp"
#include "detail.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace flipforge {

namespace fs = std::filesystem;
using nlohmann::json;

void validate(const GenConfig &cfg) {
  if (cfg.crop_size < 8 || cfg.crop_size % 2 != 0)
    throw Error(ErrorCode::InvalidConfig, "crop_size must be even and >= 8");
  if (cfg.k_min > cfg.k_max)
    throw Error(ErrorCode::InvalidConfig, "k_min must not exceed k_max");
  if (!(cfg.mask_sigma_min > 0.0) || !(cfg.mask_sigma_max >= cfg.mask_sigma_min))
    throw Error(ErrorCode::InvalidConfig,
                "mask sigma bounds must be positive with min <= max");
  const double r = cfg.disk_radius();
  if (!(r > 0.0) || !(r < cfg.crop_size / 2.0))
    throw Error(ErrorCode::InvalidConfig, "mask_disk_radius must lie in (0, s/2)");
}

json to_json(const GenConfig &cfg) {
  return {{"crop_size", cfg.crop_size},
          {"k_min", cfg.k_min},
          {"k_max", cfg.k_max},
          {"mask_sigma_min", cfg.mask_sigma_min},
          {"mask_sigma_max", cfg.mask_sigma_max},
          {"mask_disk_radius", cfg.disk_radius()},
          {"paste_mode", std::string(to_string(cfg.paste_mode))},
          {"max_place_attempts", cfg.max_place_attempts},
          {"seed", cfg.seed}};
}

std::vector<CropPair> build_crop_bank(const Sequence &seq,
                                      const AnnotationSet &labels,
                                      std::uint32_t crop_size,
                                      std::vector<MitosisEvent> *skipped) {
  std::vector<CropPair> bank;
  const std::uint32_t s = crop_size;
  for (const auto &ev : labels.events) {
    const auto cx = static_cast<std::int64_t>(std::llround(ev.x));
    const auto cy = static_cast<std::int64_t>(std::llround(ev.y));
    const bool usable = ev.t >= 1 && ev.t < seq.size() &&
                        detail::center_fits(cx, s, seq.width()) &&
                        detail::center_fits(cy, s, seq.height());
    if (!usable) {
      if (skipped)
        skipped->push_back(ev);
      continue;
    }
    const auto x0 = static_cast<std::uint32_t>(cx - s / 2);
    const auto y0 = static_cast<std::uint32_t>(cy - s / 2);
    CropPair crop{Grid(s, s), Grid(s, s), ev, s};
    const Grid &before = seq.frames[ev.t - 1].image;
    const Grid &after = seq.frames[ev.t].image;
    for (std::uint32_t y = 0; y < s; ++y)
      for (std::uint32_t x = 0; x < s; ++x) {
        crop.before_patch.at(x, y) = before.at(x0 + x, y0 + y);
        crop.after_patch.at(x, y) = after.at(x0 + x, y0 + y);
      }
    bank.push_back(std::move(crop));
  }
  return bank;
}

std::uint64_t pair_seed(std::uint64_t dataset_seed, std::uint32_t t) {
  return derive_seed(dataset_seed, "pair", t);
}

LabeledPair generate_pair(const Sequence &seq, std::uint32_t t,
                          const std::vector<CropPair> &bank,
                          const GenConfig &cfg, std::uint64_t seed) {
  if (bank.empty())
    throw Error(ErrorCode::EmptyBank, "crop bank is empty");
  validate(cfg);

  LabeledPair out;
  out.seed = seed;
  out.pair = flip_pair(pair_at(seq, t));

  Rng rng(seed);
  const std::uint32_t s = cfg.crop_size;
  const auto k = rng.uniform_int(cfg.k_min, cfg.k_max);
  const std::int64_t half = s / 2;
  const std::int64_t x_hi = static_cast<std::int64_t>(seq.width()) - 1 - half;
  const std::int64_t y_hi = static_cast<std::int64_t>(seq.height()) - 1 - half;
  if (x_hi < half || y_hi < half)
    return out; // frame too small for a single paste

  const double min_dist2 = static_cast<double>(s) * s;
  for (std::uint64_t j = 0; j < k; ++j) {
    const auto crop_id = static_cast<std::size_t>(rng.uniform_int(0, bank.size() - 1));
    const double sigma = rng.uniform(cfg.mask_sigma_min, cfg.mask_sigma_max);

    std::optional<PixelPoint> center;
    for (std::uint32_t attempt = 0; attempt < cfg.max_place_attempts; ++attempt) {
      const PixelPoint p{
          static_cast<std::int64_t>(rng.uniform_int(half, static_cast<std::uint64_t>(x_hi))),
          static_cast<std::int64_t>(rng.uniform_int(half, static_cast<std::uint64_t>(y_hi)))};
      const bool clear = std::all_of(out.events.begin(), out.events.end(),
                                     [&](const PixelPoint &q) {
                                       const double dx = static_cast<double>(p.x - q.x);
                                       const double dy = static_cast<double>(p.y - q.y);
                                       return dx * dx + dy * dy >= min_dist2;
                                     });
      if (clear) {
        center = p;
        break;
      }
    }
    if (!center)
      break; // no room left; keep what was placed

    const BlendMask mask = make_blend_mask(s, cfg.disk_radius(), sigma);
    out.pair = paste_event(out.pair, bank[crop_id], mask, *center, cfg.paste_mode);
    out.events.push_back(*center);
    out.crop_ids.push_back(crop_id);
  }
  return out;
}

std::string pair_dir_name(std::uint32_t source_t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pair_%06u", source_t);
  return buf;
}

json events_json(const LabeledPair &lp) {
  json events = json::array();
  for (const auto &p : lp.events)
    events.push_back({{"x", static_cast<double>(p.x)}, {"y", static_cast<double>(p.y)}});
  return {{"source_t", lp.pair.source_t},
          {"events", std::move(events)},
          {"crop_ids", lp.crop_ids},
          {"seed", lp.seed}};
}

namespace {

json event_json(const MitosisEvent &e) {
  return {{"t", e.t}, {"x", e.x}, {"y", e.y}};
}

} // namespace

json generate_dataset(const Sequence &seq, const AnnotationSet &labels,
                      const GenConfig &cfg, const fs::path &out,
                      const DatasetOptions &options) {
  validate(cfg);
  validate(seq);
  std::vector<MitosisEvent> skipped;
  const auto bank = build_crop_bank(seq, labels, cfg.crop_size, &skipped);
  for (const auto &ev : skipped)
    std::cerr << "warning: skipping label (t=" << ev.t << ", x=" << ev.x
              << ", y=" << ev.y << "): outside the usable crop region\n";
  if (bank.empty())
    throw Error(ErrorCode::EmptyBank,
                "no usable labels for crop size " + std::to_string(cfg.crop_size));

  std::error_code ec;
  fs::create_directories(out / "pairs", ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create " + (out / "pairs").string());

  const auto n_pairs = static_cast<std::uint32_t>(seq.size() - 1);
  std::vector<json> pair_entries(n_pairs);

  // Per-pair seeds are derived from t, so any schedule gives the same output.
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint32_t i = next.fetch_add(1);
      if (i >= n_pairs)
        return;
      try {
        const std::uint32_t t = i + 1;
        const auto seed = pair_seed(cfg.seed, t);
        const LabeledPair lp = generate_pair(seq, t, bank, cfg, seed);
        const fs::path dir = out / "pairs" / pair_dir_name(t);
        write_png16(lp.pair.before.image, dir / "before.png");
        write_png16(lp.pair.after.image, dir / "after.png");
        write_text_file(dir / "events.json", events_json(lp).dump(2) + "\n");
        pair_entries[i] = {{"source_t", t},
                           {"path", "pairs/" + pair_dir_name(t)},
                           {"n_events", lp.events.size()},
                           {"seed", seed}};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
        next.store(n_pairs);
      }
    }
  };
  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::uint32_t>(1, n_pairs));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i)
      pool.emplace_back(worker);
    worker();
  }
  if (failure)
    std::rethrow_exception(failure);

  json bank_events = json::array();
  for (const auto &c : bank)
    bank_events.push_back(event_json(c.source_event));
  json skipped_events = json::array();
  for (const auto &e : skipped)
    skipped_events.push_back(event_json(e));

  json manifest = {
      {"format_version", std::string(kDatasetFormatVersion)},
      {"sequence", {{"name", seq.name},
                    {"n_frames", seq.size()},
                    {"width", seq.width()},
                    {"height", seq.height()}}},
      {"config", to_json(cfg)},
      {"bank", {{"crop_size", cfg.crop_size},
                {"size", bank.size()},
                {"source_events", std::move(bank_events)},
                {"skipped_events", std::move(skipped_events)}}},
      {"pairs", pair_entries},
  };
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

AnnotationSet load_dataset_events(const fs::path &dataset_dir) {
  json manifest;
  try {
    manifest = json::parse(read_text_file(dataset_dir / "manifest.json"));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedAnnotations,
                "bad dataset manifest: " + std::string(e.what()));
  }
  if (manifest.value("format_version", "") != kDatasetFormatVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "dataset format version is not " + std::string(kDatasetFormatVersion));

  AnnotationSet gt;
  gt.sequence_name = manifest["sequence"].value("name", "");
  try {
    for (const auto &entry : manifest.at("pairs")) {
      const fs::path file = dataset_dir / entry.at("path").get<std::string>() / "events.json";
      const json ev = json::parse(read_text_file(file));
      const auto t = ev.at("source_t").get<std::uint32_t>();
      for (const auto &p : ev.at("events"))
        gt.events.push_back({t, p.at("x").get<double>(), p.at("y").get<double>()});
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedAnnotations,
                "bad events.json in dataset: " + std::string(e.what()));
  }
  return gt;
}

} // namespace flipforge

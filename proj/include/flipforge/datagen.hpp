#pragma once

#include "flipforge/imagecore.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flipforge {

inline constexpr std::string_view kDatasetFormatVersion = "flipforge-dataset-v1";

/// A consecutive frame pair. `source_t` is the t of the original
/// (I_{t-1}, I_t) pair; `flipped` records whether the order was swapped.
struct FramePair {
  Frame before;
  Frame after;
  std::uint32_t source_t = 0;
  bool flipped = false;

  bool operator==(const FramePair &) const = default;
};

/// Before/after patches cropped around one annotated mitosis.
struct CropPair {
  Grid before_patch;
  Grid after_patch;
  MitosisEvent source_event;
  std::uint32_t size = 0;
};

struct BlendMask {
  Grid alpha;
  double sigma = 0.0;
};

enum class PasteMode { Alpha, Direct };

std::string_view to_string(PasteMode mode);
PasteMode paste_mode_from_string(std::string_view name);

/// Integer pixel location of a paste center.
struct PixelPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  bool operator==(const PixelPoint &) const = default;
};

struct LabeledPair {
  FramePair pair;
  std::vector<PixelPoint> events;
  std::vector<std::size_t> crop_ids;
  std::uint64_t seed = 0;
};

struct GenConfig {
  std::uint32_t crop_size = 40;
  std::uint32_t k_min = 1;
  std::uint32_t k_max = 10;
  double mask_sigma_min = 2.0;
  double mask_sigma_max = 8.0;
  /// Radius of the binary disk that is blurred into the blend mask. Unset
  /// means crop_size / 4.
  std::optional<double> mask_disk_radius;
  PasteMode paste_mode = PasteMode::Alpha;
  std::uint32_t max_place_attempts = 100;
  std::uint64_t seed = 0;

  double disk_radius() const {
    return mask_disk_radius ? *mask_disk_radius : crop_size / 4.0;
  }
};

void validate(const GenConfig &cfg);
nlohmann::json to_json(const GenConfig &cfg);

/// Swaps before/after and toggles `flipped`. Pixels are untouched.
FramePair flip_pair(const FramePair &pair);

/// The unflipped pair (I_{t-1}, I_t) of `seq`.
FramePair pair_at(const Sequence &seq, std::uint32_t t);

/// Crops an s x s before/after patch around every usable labeled event.
///
/// A patch is centered on the rounded event location and spans
/// [c - s/2, c + s/2). Events closer than s/2 to a border, or with t outside
/// [1, T-1], are skipped and appended to `skipped` when given. An empty result
/// is returned, not thrown, when nothing is usable.
std::vector<CropPair> build_crop_bank(const Sequence &seq,
                                      const AnnotationSet &labels,
                                      std::uint32_t crop_size,
                                      std::vector<MitosisEvent> *skipped = nullptr);

/// Gaussian-feathered disk: a binary disk of `disk_radius` centered on pixel
/// (s/2, s/2), blurred by a Gaussian of std `sigma` truncated at
/// ceil(4 sigma) with zero padding, then divided by its maximum.
BlendMask make_blend_mask(std::uint32_t crop_size, double disk_radius,
                          double sigma);

/// Composites `crop` into both frames of `pair` centered at `center`.
///
/// Alpha mode computes (1 - a) * target + a * crop per pixel; direct mode
/// overwrites the window. Only the s x s window [c - s/2, c + s/2) changes.
/// Throws OutOfBounds when the window does not fit.
FramePair paste_event(const FramePair &pair, const CropPair &crop,
                      const BlendMask &mask, PixelPoint center, PasteMode mode);

/// Builds one labeled training pair from source pair t: the flipped pair
/// (I_t, I_{t-1}) receives k pasted mitoses at non-overlapping centers.
LabeledPair generate_pair(const Sequence &seq, std::uint32_t t,
                          const std::vector<CropPair> &bank,
                          const GenConfig &cfg, std::uint64_t pair_seed);

/// Seed used for source pair t.
std::uint64_t pair_seed(std::uint64_t dataset_seed, std::uint32_t t);

struct DatasetOptions {
  /// Worker threads for pair generation; 0 means hardware concurrency.
  unsigned threads = 0;
};

/// Emits one labeled pair per t in [1, T-1] under `out` and returns the
/// manifest that was written to `out/manifest.json`.
nlohmann::json generate_dataset(const Sequence &seq, const AnnotationSet &labels,
                                const GenConfig &cfg,
                                const std::filesystem::path &out,
                                const DatasetOptions &options = {});

std::string pair_dir_name(std::uint32_t source_t);
nlohmann::json events_json(const LabeledPair &lp);

/// Reads every pair's events.json from a dataset tree as point events with
/// t = source_t. Checks the format version.
AnnotationSet load_dataset_events(const std::filesystem::path &dataset_dir);

struct SampleMode {
  enum class Kind { NShot, MissingRate };
  Kind kind = Kind::NShot;
  std::size_t n = 1;
  double rate = 0.0;

  static SampleMode n_shot(std::size_t n) { return {Kind::NShot, n, 0.0}; }
  static SampleMode missing_rate(double r) { return {Kind::MissingRate, 0, r}; }
};

/// N-shot keeps min(n, N) events drawn without replacement; missing-rate drops
/// each event independently with probability r. Surviving events keep their
/// original order.
AnnotationSet sample_partial_labels(const AnnotationSet &labels, SampleMode mode,
                                    std::uint64_t seed);

} // namespace flipforge

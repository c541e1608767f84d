#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace flipforge {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Regression target or network output. Values are kept in double; the HMAP
/// file stores float32.
struct Heatmap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;
  /// Rendering sigma for ground truth, 0 when unknown (e.g. loaded from file).
  double sigma = 0.0;

  double at(std::uint32_t x, std::uint32_t y) const {
    return values[std::size_t{y} * width + x];
  }
};

struct Detection {
  std::uint32_t t = 0;
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

inline constexpr double kDefaultHeatmapSigma = 6.0;
inline constexpr double kDefaultPeakThreshold = 0.3;
inline constexpr double kDefaultNmsRadius = 4.0;

/// Max-fused point targets: each pixel holds
///   max_j exp(-((x_j - px)^2 + (y_j - py)^2) / sigma^2)
/// Note the sigma^2 denominator (no factor 2). Evaluated exactly at every
/// pixel for every event.
Heatmap render_targets(std::span<const Point2> events, std::uint32_t width,
                       std::uint32_t height, double sigma);

/// Local maxima (>= all 8 neighbours, >= threshold), then greedy suppression:
/// candidates by value descending, ties by (y, x) ascending, each kept iff it
/// is at least `nms_radius` from every kept one. Detections carry `t`.
std::vector<Detection> extract_peaks(const Heatmap &h, double threshold,
                                     double nms_radius, std::uint32_t t = 0);

// HMAP interchange: 16-byte little-endian header (magic "HMAP", u32 width,
// u32 height, u32 version = 1) followed by width*height float32, row-major.
inline constexpr std::uint32_t kHmapVersion = 1;
std::vector<unsigned char> encode_heatmap(const Heatmap &h);
Heatmap decode_heatmap(std::span<const unsigned char> bytes);
void save_heatmap(const Heatmap &h, const std::filesystem::path &path);
Heatmap load_heatmap(const std::filesystem::path &path);

} // namespace flipforge

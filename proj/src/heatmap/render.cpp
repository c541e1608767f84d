#include "flipforge/error.hpp"
#include "flipforge/heatmap.hpp"

#include <algorithm>
#include <cmath>

namespace flipforge {

Heatmap render_targets(std::span<const Point2> events, std::uint32_t width,
                       std::uint32_t height, double sigma) {
  if (!(sigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "heatmap sigma must be positive");
  Heatmap h{width, height, std::vector<double>(std::size_t{width} * height, 0.0),
            sigma};
  const double s2 = sigma * sigma;
  for (const Point2 &e : events) {
    for (std::uint32_t py = 0; py < height; ++py) {
      double *row = h.values.data() + std::size_t{py} * width;
      const double dy = e.y - py;
      for (std::uint32_t px = 0; px < width; ++px) {
        const double dx = e.x - px;
        const double v = std::exp(-(dx * dx + dy * dy) / s2);
        row[px] = std::max(row[px], v);
      }
    }
  }
  return h;
}

std::vector<Detection> extract_peaks(const Heatmap &h, double threshold,
                                     double nms_radius, std::uint32_t t) {
  struct Candidate {
    double value;
    std::uint32_t x, y;
  };
  std::vector<Candidate> candidates;
  const auto w = static_cast<long>(h.width);
  const auto ht = static_cast<long>(h.height);
  for (long y = 0; y < ht; ++y) {
    for (long x = 0; x < w; ++x) {
      const double v = h.values[static_cast<std::size_t>(y * w + x)];
      if (!(v >= threshold))
        continue;
      bool is_max = true;
      for (long dy = -1; dy <= 1 && is_max; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0)
            continue;
          const long nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= ht)
            continue;
          if (h.values[static_cast<std::size_t>(ny * w + nx)] > v) {
            is_max = false;
            break;
          }
        }
      if (is_max)
        candidates.push_back({v, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate &a, const Candidate &b) {
              if (a.value != b.value)
                return a.value > b.value;
              if (a.y != b.y)
                return a.y < b.y;
              return a.x < b.x;
            });

  std::vector<Detection> kept;
  const double r2 = nms_radius * nms_radius;
  for (const auto &c : candidates) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Detection &d) {
      const double dx = d.x - c.x, dy = d.y - c.y;
      return dx * dx + dy * dy >= r2;
    });
    if (clear)
      kept.push_back({t, static_cast<double>(c.x), static_cast<double>(c.y),
                      std::clamp(c.value, 0.0, 1.0)});
  }
  return kept;
}

} // namespace flipforge

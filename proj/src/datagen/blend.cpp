#include "flipforge/datagen.hpp"
#include "flipforge/error.hpp"
#include "detail.hpp"

#include <algorithm>
#include <cmath>

namespace flipforge {

namespace detail {

// A center is usable when the s x s window [c - s/2, c + s/2) fits and the
// center keeps s/2 pixels of clearance to the last pixel on each axis.
bool center_fits(std::int64_t c, std::uint32_t crop_size, std::uint32_t extent) {
  const std::int64_t half = crop_size / 2;
  return c >= half && c + half <= static_cast<std::int64_t>(extent) - 1;
}

} // namespace detail

std::string_view to_string(PasteMode mode) {
  return mode == PasteMode::Alpha ? "alpha" : "direct";
}

PasteMode paste_mode_from_string(std::string_view name) {
  if (name == "alpha")
    return PasteMode::Alpha;
  if (name == "direct")
    return PasteMode::Direct;
  throw Error(ErrorCode::InvalidConfig,
              "paste mode must be alpha or direct, got " + std::string(name));
}

FramePair flip_pair(const FramePair &pair) {
  FramePair out;
  out.before = pair.after;
  out.after = pair.before;
  out.source_t = pair.source_t;
  out.flipped = !pair.flipped;
  return out;
}

FramePair pair_at(const Sequence &seq, std::uint32_t t) {
  if (t < 1 || t >= seq.size())
    throw Error(ErrorCode::InvalidArgument,
                "pair index t=" + std::to_string(t) + " outside [1, T-1]");
  return {seq.frames[t - 1], seq.frames[t], t, false};
}

BlendMask make_blend_mask(std::uint32_t crop_size, double disk_radius,
                          double sigma) {
  if (!(disk_radius > 0.0) || !(disk_radius < crop_size / 2.0))
    throw Error(ErrorCode::InvalidArgument, "disk radius must lie in (0, s/2)");
  if (!(sigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "mask sigma must be positive");

  const std::uint32_t s = crop_size;
  const double c = s / 2;
  Grid disk(s, s, 0.0);
  const double r2 = disk_radius * disk_radius;
  for (std::uint32_t y = 0; y < s; ++y)
    for (std::uint32_t x = 0; x < s; ++x) {
      const double dx = x - c, dy = y - c;
      if (dx * dx + dy * dy <= r2)
        disk.at(x, y) = 1.0;
    }

  const auto radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    ksum += kernel[i + radius];
  }
  for (double &k : kernel)
    k /= ksum;

  // Separable pass, zero padding outside the patch.
  Grid rows(s, s, 0.0);
  for (std::uint32_t y = 0; y < s; ++y)
    for (std::uint32_t x = 0; x < s; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const long xx = static_cast<long>(x) + i;
        if (xx >= 0 && xx < static_cast<long>(s))
          acc += kernel[i + radius] * disk.at(static_cast<std::uint32_t>(xx), y);
      }
      rows.at(x, y) = acc;
    }
  BlendMask mask{Grid(s, s, 0.0), sigma};
  double peak = 0.0;
  for (std::uint32_t y = 0; y < s; ++y)
    for (std::uint32_t x = 0; x < s; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const long yy = static_cast<long>(y) + i;
        if (yy >= 0 && yy < static_cast<long>(s))
          acc += kernel[i + radius] * rows.at(x, static_cast<std::uint32_t>(yy));
      }
      mask.alpha.at(x, y) = acc;
      peak = std::max(peak, acc);
    }
  for (double &a : mask.alpha.values)
    a = std::clamp(a / peak, 0.0, 1.0);
  return mask;
}

FramePair paste_event(const FramePair &pair, const CropPair &crop,
                      const BlendMask &mask, PixelPoint center, PasteMode mode) {
  const std::uint32_t s = crop.size;
  if (crop.before_patch.width != s || crop.before_patch.height != s ||
      crop.after_patch.width != s || crop.after_patch.height != s ||
      mask.alpha.width != s || mask.alpha.height != s)
    throw Error(ErrorCode::SizeMismatch, "crop and mask must both be s x s");
  const auto w = pair.before.width();
  const auto h = pair.before.height();
  if (pair.after.width() != w || pair.after.height() != h)
    throw Error(ErrorCode::MixedDimensions, "pair frames differ in size");
  if (!detail::center_fits(center.x, s, w) || !detail::center_fits(center.y, s, h))
    throw Error(ErrorCode::OutOfBounds,
                "paste center (" + std::to_string(center.x) + ", " +
                    std::to_string(center.y) + ") too close to the border");

  FramePair out = pair;
  const auto x0 = static_cast<std::uint32_t>(center.x - s / 2);
  const auto y0 = static_cast<std::uint32_t>(center.y - s / 2);

  auto composite = [&](Grid &target, const Grid &patch) {
    for (std::uint32_t py = 0; py < s; ++py)
      for (std::uint32_t px = 0; px < s; ++px) {
        double &dst = target.at(x0 + px, y0 + py);
        const double src = patch.at(px, py);
        if (mode == PasteMode::Direct) {
          dst = src;
          continue;
        }
        const double a = mask.alpha.at(px, py);
        const double blended = (1.0 - a) * dst + a * src;
        // Keep the convex combination inside [min, max] despite rounding.
        dst = std::clamp(blended, std::min(dst, src), std::max(dst, src));
      }
  };
  composite(out.before.image, crop.before_patch);
  composite(out.after.image, crop.after_patch);
  return out;
}

} // namespace flipforge

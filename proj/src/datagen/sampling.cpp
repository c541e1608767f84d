#include "flipforge/datagen.hpp"
#include "flipforge/error.hpp"
#include "flipforge/rng.hpp"

#include <algorithm>
#include <numeric>

namespace flipforge {

AnnotationSet sample_partial_labels(const AnnotationSet &labels, SampleMode mode,
                                    std::uint64_t seed) {
  AnnotationSet out;
  out.sequence_name = labels.sequence_name;
  Rng rng(seed);
  const std::size_t n_total = labels.events.size();

  if (mode.kind == SampleMode::Kind::NShot) {
    if (mode.n < 1)
      throw Error(ErrorCode::InvalidArgument, "n-shot needs n >= 1");
    const std::size_t keep = std::min(mode.n, n_total);
    // Partial Fisher-Yates over indices, then restore original order.
    std::vector<std::size_t> idx(n_total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(i, n_total - 1));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx)
      out.events.push_back(labels.events[i]);
    return out;
  }

  if (!(mode.rate >= 0.0 && mode.rate <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "missing rate must lie in [0, 1]");
  for (const auto &ev : labels.events) {
    if (!(rng.uniform01() < mode.rate))
      out.events.push_back(ev);
  }
  return out;
}

} // namespace flipforge

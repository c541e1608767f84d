#pragma once

#include "flipforge/imagecore.hpp"

#include <cstdint>
#include <vector>

namespace flipforge {

struct SimConfig {
  std::uint32_t width = 128;
  std::uint32_t height = 128;
  std::uint32_t n_frames = 30;
  std::uint32_t n_cells = 12;
  double blob_sigma = 2.5;
  double drift_sigma = 0.7;
  double division_rate = 0.02;
  double split_distance = 14.0;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  bool operator==(const SimConfig &) const = default;
};

void validate(const SimConfig &cfg);

struct SimResult {
  Sequence sequence;
  AnnotationSet ground_truth;
  /// Number of cells present in each frame (a dividing parent counts once
  /// until its children appear).
  std::vector<std::size_t> cells_per_frame;
};

/// Renders a synthetic fluorescent time-lapse with exact mitosis ground truth.
///
/// Cells are additive isotropic Gaussian blobs doing a reflected Gaussian
/// random walk. A cell that decides to divide at frame t-1 is drawn 1.25x
/// brighter there; at frame t it is replaced by two children (0.8x its base
/// amplitude) half-way apart along a random axis, and at t+1 they reach the
/// full split distance. The ground-truth event is (t, parent_x, parent_y).
/// Each cell draws from its own substream, derived from (seed, cell id).
/// Intensities are snapped to the 16-bit lattice so that a saved and
/// reloaded sequence compares equal.
SimResult simulate(const SimConfig &cfg);

} // namespace flipforge

#include "flipforge/simulate.hpp"

#include "flipforge/error.hpp"
#include "flipforge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flipforge {

namespace {

enum class CellState { Normal, Mitotic, Separating, Dead };

struct Cell {
  std::uint64_t id = 0;
  Rng rng;
  CellState state = CellState::Normal;
  double x = 0.0;
  double y = 0.0;
  double amplitude = 0.0;
  // Separating children: midpoint and unit offset toward this child.
  double mid_x = 0.0, mid_y = 0.0, dir_x = 0.0, dir_y = 0.0;
  // Frame at which the cell first takes a random-walk step.
  std::uint32_t walk_from = 1;
  // Rendered at 0.8x amplitude for frames before this one.
  std::uint32_t dim_until = 0;

  Cell(std::uint64_t cell_id, std::uint64_t seed)
      : id(cell_id), rng(derive_seed(seed, "cell", cell_id)) {}
};

double reflect(double v, double hi) {
  // Reflect into [0, hi]; loop handles steps longer than the field.
  for (int i = 0; i < 64 && (v < 0.0 || v > hi); ++i) {
    if (v < 0.0)
      v = -v;
    if (v > hi)
      v = 2.0 * hi - v;
  }
  return std::clamp(v, 0.0, hi);
}

void add_blob(Grid &img, double cx, double cy, double amplitude, double sigma) {
  const double radius = 4.0 * sigma;
  const double r2max = radius * radius;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const auto x0 = static_cast<long>(std::max(0.0, std::ceil(cx - radius)));
  const auto x1 = static_cast<long>(std::min<double>(img.width - 1, std::floor(cx + radius)));
  const auto y0 = static_cast<long>(std::max(0.0, std::ceil(cy - radius)));
  const auto y1 = static_cast<long>(std::min<double>(img.height - 1, std::floor(cy + radius)));
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= r2max)
        img.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) +=
            amplitude * std::exp(-d2 * inv);
    }
  }
}

} // namespace

void validate(const SimConfig &cfg) {
  if (cfg.n_frames == 0)
    throw Error(ErrorCode::InvalidConfig, "simulation needs at least one frame");
  if (cfg.n_cells == 0)
    throw Error(ErrorCode::InvalidConfig, "simulation needs at least one cell");
  if (cfg.width < 16 || cfg.height < 16)
    throw Error(ErrorCode::InvalidConfig, "simulation field must be at least 16x16");
  if (!(cfg.division_rate >= 0.0 && cfg.division_rate <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "division_rate must lie in [0, 1]");
  if (!(cfg.blob_sigma > 0.0))
    throw Error(ErrorCode::InvalidConfig, "blob_sigma must be positive");
  if (!(cfg.drift_sigma >= 0.0) || !(cfg.noise_sigma >= 0.0) ||
      !(cfg.split_distance >= 0.0))
    throw Error(ErrorCode::InvalidConfig,
                "drift_sigma, noise_sigma and split_distance must be non-negative");
}

SimResult simulate(const SimConfig &cfg) {
  validate(cfg);

  const double xmax = cfg.width - 1.0;
  const double ymax = cfg.height - 1.0;
  const std::uint32_t last_decision_frame = cfg.n_frames >= 2 ? cfg.n_frames - 2 : 0;
  const bool can_divide = cfg.n_frames >= 2;

  SimResult result;
  result.sequence.name = "sim_" + std::to_string(cfg.seed);
  result.ground_truth.sequence_name = result.sequence.name;

  std::vector<Cell> cells;
  for (std::uint32_t i = 0; i < cfg.n_cells; ++i) {
    Cell c(i, cfg.seed);
    c.x = c.rng.uniform01() * xmax;
    c.y = c.rng.uniform01() * ymax;
    // Capped so the 1.25x mitotic frame stays below saturation.
    c.amplitude = c.rng.uniform(0.5, 0.75);
    cells.push_back(std::move(c));
  }
  std::uint64_t next_id = cfg.n_cells;

  for (std::uint32_t f = 0; f < cfg.n_frames; ++f) {
    std::vector<Cell> born;
    for (Cell &c : cells) {
      switch (c.state) {
      case CellState::Dead:
        break;
      case CellState::Separating:
        // Second frame after the split: children reach the full distance.
        c.x = reflect(c.mid_x + 0.5 * cfg.split_distance * c.dir_x, xmax);
        c.y = reflect(c.mid_y + 0.5 * cfg.split_distance * c.dir_y, ymax);
        c.state = CellState::Normal;
        c.walk_from = f + 1;
        break;
      case CellState::Normal:
        if (f >= c.walk_from) {
          const auto step = c.rng.normal_pair();
          c.x = reflect(c.x + cfg.drift_sigma * step[0], xmax);
          c.y = reflect(c.y + cfg.drift_sigma * step[1], ymax);
        }
        if (can_divide && f <= last_decision_frame &&
            c.rng.uniform01() < cfg.division_rate)
          c.state = CellState::Mitotic;
        break;
      case CellState::Mitotic: {
        result.ground_truth.events.push_back({f, c.x, c.y});
        const double angle = 2.0 * std::numbers::pi * c.rng.uniform01();
        const double ux = std::cos(angle);
        const double uy = std::sin(angle);
        const double mid_x = c.x, mid_y = c.y, amp = c.amplitude;
        c.state = CellState::Dead;
        for (double sign : {1.0, -1.0}) {
          Cell child(next_id++, cfg.seed);
          child.state = CellState::Separating;
          child.amplitude = amp;
          child.dim_until = f + 2;
          child.mid_x = mid_x;
          child.mid_y = mid_y;
          child.dir_x = sign * ux;
          child.dir_y = sign * uy;
          child.x = reflect(mid_x + 0.25 * cfg.split_distance * child.dir_x, xmax);
          child.y = reflect(mid_y + 0.25 * cfg.split_distance * child.dir_y, ymax);
          born.push_back(std::move(child));
        }
        break;
      }
      }
    }
    for (Cell &child : born)
      cells.push_back(std::move(child));

    Grid img(cfg.width, cfg.height, 0.0);
    std::size_t alive = 0;
    for (const Cell &c : cells) {
      double amp = c.amplitude;
      switch (c.state) {
      case CellState::Dead:
        continue;
      case CellState::Mitotic:
        amp *= 1.25;
        break;
      case CellState::Separating:
      case CellState::Normal:
        if (f < c.dim_until)
          amp *= 0.8;
        break;
      }
      ++alive;
      add_blob(img, c.x, c.y, amp, cfg.blob_sigma);
    }
    result.cells_per_frame.push_back(alive);

    if (cfg.noise_sigma > 0.0) {
      Rng noise(derive_seed(cfg.seed, "noise", f));
      for (std::size_t p = 0; p < img.values.size(); p += 2) {
        const auto n = noise.normal_pair();
        img.values[p] += cfg.noise_sigma * n[0];
        if (p + 1 < img.values.size())
          img.values[p + 1] += cfg.noise_sigma * n[1];
      }
    }
    quantize_to_u16(img); // also clips to [0, 1]
    result.sequence.frames.push_back({f, std::move(img)});
  }
  return result;
}

} // namespace flipforge

#include "flipforge/error.hpp"
#include "flipforge/imagecore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace flipforge {

void validate(const Grid &grid) {
  if (grid.values.size() != std::size_t{grid.width} * grid.height)
    throw Error(ErrorCode::SizeMismatch, "grid size does not match dimensions");
  for (double v : grid.values) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "intensity outside [0, 1]");
  }
}

void validate(const Sequence &seq) {
  if (seq.frames.empty())
    throw Error(ErrorCode::EmptySequence, "sequence has no frames");
  const auto w = seq.frames[0].width();
  const auto h = seq.frames[0].height();
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const Frame &f = seq.frames[i];
    if (f.t != i)
      throw Error(ErrorCode::NonContiguousFrames,
                  "frame " + std::to_string(i) + " carries t=" +
                      std::to_string(f.t));
    if (f.width() != w || f.height() != h)
      throw Error(ErrorCode::MixedDimensions,
                  "frame " + std::to_string(i) + " has mismatched dimensions");
    validate(f.image);
  }
}

void validate(const AnnotationSet &labels) {
  std::set<std::tuple<std::uint32_t, double, double>> seen;
  for (const auto &e : labels.events) {
    if (!(e.x >= 0.0) || !(e.y >= 0.0))
      throw Error(ErrorCode::NegativeCoordinate,
                  "event at t=" + std::to_string(e.t) +
                      " has a negative coordinate");
    if (!seen.emplace(e.t, e.x, e.y).second)
      throw Error(ErrorCode::DuplicateEvent,
                  "duplicate event at t=" + std::to_string(e.t));
  }
}

bool event_in_sequence(const MitosisEvent &event, const Sequence &seq) {
  return event.t >= 1 && event.t < seq.size() && event.x >= 0.0 &&
         event.x < seq.width() && event.y >= 0.0 && event.y < seq.height();
}

std::uint16_t to_u16(double intensity) {
  const double v = std::clamp(intensity, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(v * 65535.0));
}

double from_u16(std::uint16_t raw) { return static_cast<double>(raw) / 65535.0; }

void quantize_to_u16(Grid &grid) {
  for (double &v : grid.values)
    v = from_u16(to_u16(v));
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace flipforge

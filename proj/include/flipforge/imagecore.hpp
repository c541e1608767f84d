#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace flipforge {

/// Row-major grid of real values. Used for frames, crop patches and masks.
struct Grid {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::uint32_t w, std::uint32_t h, double fill = 0.0)
      : width(w), height(h), values(std::size_t{w} * h, fill) {}

  double at(std::uint32_t x, std::uint32_t y) const {
    return values[std::size_t{y} * width + x];
  }
  double &at(std::uint32_t x, std::uint32_t y) {
    return values[std::size_t{y} * width + x];
  }
  std::size_t size() const { return values.size(); }

  bool operator==(const Grid &) const = default;
};

/// One time-lapse image. x is the column, y the row, origin at the top-left
/// pixel center. Intensities live in [0, 1].
struct Frame {
  std::uint32_t t = 0;
  Grid image;

  std::uint32_t width() const { return image.width; }
  std::uint32_t height() const { return image.height; }

  bool operator==(const Frame &) const = default;
};

struct Sequence {
  std::string name;
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  std::uint32_t width() const { return frames.empty() ? 0 : frames[0].width(); }
  std::uint32_t height() const {
    return frames.empty() ? 0 : frames[0].height();
  }

  bool operator==(const Sequence &) const = default;
};

/// A mitosis observed across the pair (I_{t-1}, I_t).
struct MitosisEvent {
  std::uint32_t t = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const MitosisEvent &) const = default;
};

struct AnnotationSet {
  std::string sequence_name;
  std::vector<MitosisEvent> events;

  std::size_t size() const { return events.size(); }
  bool operator==(const AnnotationSet &) const = default;
};

// Validation. Each throws flipforge::Error on violation.
void validate(const Grid &grid);
void validate(const Sequence &seq);
void validate(const AnnotationSet &labels);
/// Checks the event against the sequence bounds (0 <= x < w, 1 <= t <= T-1).
bool event_in_sequence(const MitosisEvent &event, const Sequence &seq);

/// 16-bit lattice helpers. Quantization rounds to nearest and clamps.
std::uint16_t to_u16(double intensity);
double from_u16(std::uint16_t raw);
/// Snaps every value to the nearest 16-bit lattice point.
void quantize_to_u16(Grid &grid);

// 16-bit grayscale PNG frames.
Grid read_png16(const std::filesystem::path &path);
void write_png16(const Grid &grid, const std::filesystem::path &path);

/// Loads `t0000.png`, `t0001.png`, ... from `dir`. The sequence name is the
/// directory's file name.
Sequence load_sequence(const std::filesystem::path &dir);
void save_sequence(const Sequence &seq, const std::filesystem::path &dir);
std::string frame_file_name(std::uint32_t t);

AnnotationSet load_annotations(const std::filesystem::path &path);
void save_annotations(const AnnotationSet &labels,
                      const std::filesystem::path &path);
AnnotationSet parse_annotations(const std::string &text);
std::string format_annotations(const AnnotationSet &labels);

/// Writes `text` to `path`, creating parent directories. Throws Io on failure.
void write_text_file(const std::filesystem::path &path, std::string_view text);
std::string read_text_file(const std::filesystem::path &path);

} // namespace flipforge

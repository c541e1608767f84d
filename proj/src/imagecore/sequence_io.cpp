#include "flipforge/error.hpp"
#include "flipforge/imagecore.hpp"

#include <json.hpp>

#include <cstdio>
#include <map>
#include <regex>

namespace flipforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_file_name(std::uint32_t t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%04u.png", t);
  return buf;
}

Sequence load_sequence(const fs::path &dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::MissingDirectory,
                "frame directory not found: " + dir.string());

  static const std::regex pattern(R"(t(\d{4,})\.png)");
  std::map<std::uint64_t, fs::path> indexed;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, pattern))
      indexed.emplace(std::stoull(m[1].str()), entry.path());
  }
  if (indexed.empty())
    throw Error(ErrorCode::NoFrames, "no t####.png frames in " + dir.string());

  Sequence seq;
  seq.name = fs::absolute(dir).lexically_normal().filename().string();
  if (seq.name.empty())
    seq.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();

  std::uint64_t expected = 0;
  for (const auto &[index, path] : indexed) {
    if (index != expected)
      throw Error(ErrorCode::NonContiguousFrames,
                  "frame index " + std::to_string(expected) + " missing in " +
                      dir.string());
    Frame frame{static_cast<std::uint32_t>(index), read_png16(path)};
    if (!seq.frames.empty() && (frame.width() != seq.width() ||
                                frame.height() != seq.height()))
      throw Error(ErrorCode::MixedDimensions,
                  path.string() + " differs in size from the first frame");
    seq.frames.push_back(std::move(frame));
    ++expected;
  }
  return seq;
}

void save_sequence(const Sequence &seq, const fs::path &dir) {
  if (seq.frames.empty())
    throw Error(ErrorCode::EmptySequence, "refusing to save an empty sequence");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < seq.frames.size(); ++i)
    write_png16(seq.frames[i].image, dir / frame_file_name(static_cast<std::uint32_t>(i)));
}

AnnotationSet parse_annotations(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::MalformedAnnotations, e.what());
  }

  AnnotationSet labels;
  try {
    if (!doc.is_object() || !doc.contains("events") || !doc["events"].is_array())
      throw Error(ErrorCode::MalformedAnnotations,
                  "annotation file needs an \"events\" array");
    if (doc.contains("sequence"))
      labels.sequence_name = doc["sequence"].get<std::string>();
    for (const auto &ev : doc["events"]) {
      if (!ev.is_object() || !ev.contains("t") || !ev.contains("x") ||
          !ev.contains("y"))
        throw Error(ErrorCode::MalformedAnnotations,
                    "event needs t, x and y: " + ev.dump());
      if (!ev["t"].is_number_integer() || !ev["x"].is_number() ||
          !ev["y"].is_number())
        throw Error(ErrorCode::MalformedAnnotations,
                    "event fields have the wrong type: " + ev.dump());
      if (ev["t"].get<std::int64_t>() < 0)
        throw Error(ErrorCode::NegativeCoordinate,
                    "negative frame index: " + ev.dump());
      labels.events.push_back({ev["t"].get<std::uint32_t>(), ev["x"].get<double>(),
                               ev["y"].get<double>()});
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedAnnotations, e.what());
  }
  validate(labels);
  return labels;
}

std::string format_annotations(const AnnotationSet &labels) {
  json events = json::array();
  for (const auto &e : labels.events)
    events.push_back({{"t", e.t}, {"x", e.x}, {"y", e.y}});
  json doc = {{"sequence", labels.sequence_name}, {"events", std::move(events)}};
  return doc.dump(2) + "\n";
}

AnnotationSet load_annotations(const fs::path &path) {
  return parse_annotations(read_text_file(path));
}

void save_annotations(const AnnotationSet &labels, const fs::path &path) {
  validate(labels);
  write_text_file(path, format_annotations(labels));
}

} // namespace flipforge

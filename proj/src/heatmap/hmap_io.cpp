#include "flipforge/error.hpp"
#include "flipforge/heatmap.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace flipforge {

namespace {

constexpr std::size_t kHeaderSize = 16;

void put_u32(std::vector<unsigned char> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const unsigned char> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return v;
}

} // namespace

std::vector<unsigned char> encode_heatmap(const Heatmap &h) {
  if (h.values.size() != std::size_t{h.width} * h.height)
    throw Error(ErrorCode::SizeMismatch, "heatmap size does not match dimensions");
  std::vector<unsigned char> out;
  out.reserve(kHeaderSize + h.values.size() * 4);
  out.insert(out.end(), {'H', 'M', 'A', 'P'});
  put_u32(out, h.width);
  put_u32(out, h.height);
  put_u32(out, kHmapVersion);
  for (double v : h.values)
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Heatmap decode_heatmap(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderSize)
    throw Error(ErrorCode::SizeMismatch, "heatmap file shorter than its header");
  if (std::memcmp(bytes.data(), "HMAP", 4) != 0)
    throw Error(ErrorCode::BadMagic, "heatmap file does not start with HMAP");
  Heatmap h;
  h.width = get_u32(bytes, 4);
  h.height = get_u32(bytes, 8);
  const std::uint32_t version = get_u32(bytes, 12);
  if (version != kHmapVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "unsupported heatmap version " + std::to_string(version));
  const std::size_t count = std::size_t{h.width} * h.height;
  if (bytes.size() - kHeaderSize != count * 4)
    throw Error(ErrorCode::SizeMismatch,
                "heatmap header says " + std::to_string(h.width) + "x" +
                    std::to_string(h.height) + " but payload holds " +
                    std::to_string((bytes.size() - kHeaderSize) / 4) + " floats");
  h.values.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    h.values[i] = std::bit_cast<float>(get_u32(bytes, kHeaderSize + 4 * i));
  return h;
}

void save_heatmap(const Heatmap &h, const std::filesystem::path &path) {
  const auto bytes = encode_heatmap(h);
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Heatmap load_heatmap(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  return decode_heatmap(bytes);
}

} // namespace flipforge

#include "flipforge/error.hpp"
#include "flipforge/imagecore.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace flipforge {

namespace {

struct FileCloser {
  void operator()(std::FILE *f) const {
    if (f)
      std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; the message is parked here first.
struct PngErrorSink {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto *sink = static_cast<PngErrorSink *>(png_get_error_ptr(png));
  if (sink)
    std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct ReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadState() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct WriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteState() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

} // namespace

Grid read_png16(const std::filesystem::path &path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot open " + path.string());

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0)
    throw Error(ErrorCode::UnsupportedBitDepth,
                path.string() + " is not a PNG file");

  PngErrorSink sink;
  ReadState st;
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                  on_png_warning);
  if (!st.png)
    throw Error(ErrorCode::Io, "png_create_read_struct failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info)
    throw Error(ErrorCode::Io, "png_create_info_struct failed");

  Grid grid;
  std::vector<png_byte> row;
  int bit_depth = 0;
  int color_type = 0;

  if (setjmp(png_jmpbuf(st.png)))
    throw Error(ErrorCode::Io, path.string() + ": " + sink.message);

  png_init_io(st.png, file.get());
  png_set_sig_bytes(st.png, 8);
  png_read_info(st.png, st.info);

  const auto width = png_get_image_width(st.png, st.info);
  const auto height = png_get_image_height(st.png, st.info);
  bit_depth = png_get_bit_depth(st.png, st.info);
  color_type = png_get_color_type(st.png, st.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY ||
      png_get_interlace_type(st.png, st.info) != PNG_INTERLACE_NONE)
    // Only 16-bit single-channel, non-interlaced frames are accepted.
    throw Error(ErrorCode::UnsupportedBitDepth,
                path.string() + ": expected 16-bit grayscale, got depth " +
                    std::to_string(bit_depth) + " color type " +
                    std::to_string(color_type));

  grid = Grid(width, height);
  row.resize(std::size_t{width} * 2);
  for (png_uint_32 y = 0; y < height; ++y) {
    png_read_row(st.png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < width; ++x) {
      const auto raw = static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
      grid.at(x, y) = from_u16(raw);
    }
  }
  png_read_end(st.png, nullptr);
  return grid;
}

void write_png16(const Grid &grid, const std::filesystem::path &path) {
  if (grid.width == 0 || grid.height == 0)
    throw Error(ErrorCode::InvalidArgument, "cannot write an empty image");

  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");

  PngErrorSink sink;
  WriteState st;
  st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error,
                                   on_png_warning);
  if (!st.png)
    throw Error(ErrorCode::Io, "png_create_write_struct failed");
  st.info = png_create_info_struct(st.png);
  if (!st.info)
    throw Error(ErrorCode::Io, "png_create_info_struct failed");

  std::vector<png_byte> row(std::size_t{grid.width} * 2);

  if (setjmp(png_jmpbuf(st.png)))
    throw Error(ErrorCode::Io, path.string() + ": " + sink.message);

  png_init_io(st.png, file.get());
  png_set_compression_level(st.png, 6);
  png_set_IHDR(st.png, st.info, grid.width, grid.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st.png, st.info);
  for (std::uint32_t y = 0; y < grid.height; ++y) {
    for (std::uint32_t x = 0; x < grid.width; ++x) {
      const std::uint16_t raw = to_u16(grid.at(x, y));
      row[2 * x] = static_cast<png_byte>(raw >> 8);
      row[2 * x + 1] = static_cast<png_byte>(raw & 0xff);
    }
    png_write_row(st.png, row.data());
  }
  png_write_end(st.png, nullptr);

  if (std::fflush(file.get()) != 0)
    throw Error(ErrorCode::Io, "flush failed: " + path.string());
}

} // namespace flipforge

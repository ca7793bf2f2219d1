#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "s2d/io.hpp"

namespace s2d {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_file(const fs::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw InvalidInput("cannot open " + path.string());
  return f;
}

enum class Layout { gray16, rgb8 };

struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bytes;
};

// Captures libpng's message instead of letting it print to stderr.
struct PngMessage {
  char text[200] = "";
};

void on_png_error(png_structp png, png_const_charp message) {
  auto* out = static_cast<PngMessage*>(png_get_error_ptr(png));
  std::strncpy(out->text, message, sizeof out->text - 1);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// libpng reports errors with longjmp; everything with a destructor lives outside this frame.
bool decode(std::FILE* file, Layout layout, RawImage& out, bool& wrong_format, PngMessage& message) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (layout == Layout::gray16) {
    if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
      wrong_format = true;
      png_destroy_read_struct(&png, &info, nullptr);
      return false;
    }
    png_set_swap(png);  // native little-endian uint16
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  const std::size_t expected = layout == Layout::gray16 ? width * 2u : width * 3u;
  if (row_bytes != expected) {
    wrong_format = true;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.bytes.resize(row_bytes * height);
  for (png_uint_32 y = 0; y < height; ++y) png_read_row(png, out.bytes.data() + y * row_bytes, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode(std::FILE* file, Layout layout, const RawImage& in, PngMessage& message) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(in.width), static_cast<png_uint_32>(in.height),
               layout == Layout::gray16 ? 16 : 8, layout == Layout::gray16 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (layout == Layout::gray16) png_set_swap(png);
  const std::size_t row_bytes = layout == Layout::gray16 ? in.width * 2u : in.width * 3u;
  for (int y = 0; y < in.height; ++y)
    png_write_row(png, const_cast<png_bytep>(in.bytes.data() + static_cast<std::size_t>(y) * row_bytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

RawImage read_raw(const fs::path& path, Layout layout) {
  File file = open_file(path, "rb");
  RawImage raw;
  bool wrong_format = false;
  PngMessage message;
  if (!decode(file.get(), layout, raw, wrong_format, message)) {
    if (wrong_format)
      throw ParseError(path.string(), 0,
                       layout == Layout::gray16 ? "expected a 16-bit grayscale PNG" : "unsupported PNG layout");
    throw ParseError(path.string(), 0, std::string("not a readable PNG file: ") + message.text);
  }
  return raw;
}

void write_raw(const fs::path& path, Layout layout, const RawImage& raw) {
  if (raw.width <= 0 || raw.height <= 0) throw InvalidInput("cannot write an empty PNG: " + path.string());
  File file = open_file(path, "wb");
  PngMessage message;
  if (!encode(file.get(), layout, raw, message))
    throw Error("failed to encode " + path.string() + ": " + message.text);
  if (std::fflush(file.get()) != 0) throw Error("failed to write " + path.string());
}

}  // namespace

Image<std::uint16_t> read_png16(const fs::path& path) {
  const RawImage raw = read_raw(path, Layout::gray16);
  Image<std::uint16_t> out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint16_t>(raw.bytes[2 * i] | (raw.bytes[2 * i + 1] << 8));
  return out;
}

void write_png16(const fs::path& path, const Image<std::uint16_t>& image) {
  RawImage raw{image.width(), image.height(), std::vector<std::uint8_t>(image.size() * 2)};
  for (std::size_t i = 0; i < image.size(); ++i) {
    raw.bytes[2 * i] = static_cast<std::uint8_t>(image[i] & 0xff);
    raw.bytes[2 * i + 1] = static_cast<std::uint8_t>(image[i] >> 8);
  }
  write_raw(path, Layout::gray16, raw);
}

ColorImage read_color_png(const fs::path& path) {
  const RawImage raw = read_raw(path, Layout::rgb8);
  ColorImage out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {raw.bytes[3 * i], raw.bytes[3 * i + 1], raw.bytes[3 * i + 2]};
  return out;
}

void write_color_png(const fs::path& path, const ColorImage& image) {
  RawImage raw{image.width(), image.height(), std::vector<std::uint8_t>(image.size() * 3)};
  for (std::size_t i = 0; i < image.size(); ++i) {
    raw.bytes[3 * i] = image[i].r;
    raw.bytes[3 * i + 1] = image[i].g;
    raw.bytes[3 * i + 2] = image[i].b;
  }
  write_raw(path, Layout::rgb8, raw);
}

Image<std::uint16_t> quantize_depth(const DepthImage& depth, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("depth scale must be positive");
  Image<std::uint16_t> out(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    const double q = std::round(depth[i] * scale);
    if (q >= 1.0 && q <= 65535.0) out[i] = static_cast<std::uint16_t>(q);
  }
  return out;
}

DepthImage dequantize_depth(const Image<std::uint16_t>& raw, double scale) {
  if (!(scale > 0.0)) throw InvalidInput("depth scale must be positive");
  DepthImage out(raw.width(), raw.height());
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (raw[i] != 0) out.set(i, raw[i] / scale);
  return out;
}

}  // namespace s2d

// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace dda {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct ErrorSink {
  std::jmp_buf jump;
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  std::longjmp(sink->jump, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

} // namespace

std::uint8_t quantize_sample(double s) {
  const double c = std::clamp(s, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

Image load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw PngError(PngError::Kind::kNotFound, "cannot open " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw PngError(PngError::Kind::kCorrupt, path.string() + ": not a PNG stream");

  ErrorSink sink;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError(PngError::Kind::kCorrupt, "libpng initialization failed");
  }

  // Declared before setjmp so longjmp leaves them in a defined state.
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  int height = 0, width = 0, depth = 0, color = 0;

  if (setjmp(sink.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError(PngError::Kind::kCorrupt, path.string() + ": " + sink.message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);

  const bool color_ok = color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA;
  if (!color_ok || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw PngError(PngError::Kind::kUnsupported,
                   path.string() + ": unsupported PNG (color type " + std::to_string(color) +
                       ", bit depth " + std::to_string(depth) + "); need 8/16-bit RGB or RGBA");
  }
  if (depth == 16) png_set_swap(png);  // host little-endian u16 below
  png_read_update_info(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (int r = 0; r < height; ++r) rows[r] = buffer.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int src_channels = color == PNG_COLOR_TYPE_RGB_ALPHA ? 4 : 3;
  Image image(height, width);
  auto dst = image.data();
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const std::size_t k = static_cast<std::size_t>(c) * src_channels + ch;
        double v;
        if (depth == 8) {
          v = rows[r][k] / 255.0;
        } else {
          std::uint16_t s;
          std::memcpy(&s, rows[r] + 2 * k, 2);
          v = s / 65535.0;
        }
        dst[(static_cast<std::size_t>(r) * width + c) * 3 + ch] = v;
      }
    }
  }
  return image;
}

namespace {

void write_png(const std::filesystem::path& path, int height, int width, int color_type,
               const std::vector<png_byte>& pixels, int channels) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw PngError(PngError::Kind::kWriteFailed, "cannot write " + path.string());

  ErrorSink sink;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw PngError(PngError::Kind::kWriteFailed, "libpng initialization failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(sink.jump)) {
    png_destroy_write_struct(&png, &info);
    throw PngError(PngError::Kind::kWriteFailed, path.string() + ": " + sink.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r)
    rows[r] = const_cast<png_bytep>(pixels.data()) + static_cast<std::size_t>(r) * width * channels;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0)
    throw PngError(PngError::Kind::kWriteFailed, "flush failed for " + path.string());
}

} // namespace

void save_png(const Image& image, const std::filesystem::path& path) {
  const auto src = image.data();
  std::vector<png_byte> pixels(src.size());
  std::transform(src.begin(), src.end(), pixels.begin(), quantize_sample);
  write_png(path, image.height(), image.width(), PNG_COLOR_TYPE_RGB, pixels, 3);
}

void save_png_gray(const Plane& plane, const std::filesystem::path& path) {
  std::vector<png_byte> pixels(plane.data.size());
  std::transform(plane.data.begin(), plane.data.end(), pixels.begin(), quantize_sample);
  write_png(path, plane.height, plane.width, PNG_COLOR_TYPE_GRAY, pixels, 1);
}

} // namespace dda

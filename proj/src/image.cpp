// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dda/error.hpp"

namespace dda {

Image::Image(int height, int width, double fill)
    : height_(height), width_(width),
      data_(static_cast<std::size_t>(height) * width * kChannels, fill) {
  if (height < 0 || width < 0) throw InvalidArgument("image dimensions must be non-negative");
}

Image::Image(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 0 || width < 0) throw InvalidArgument("image dimensions must be non-negative");
  if (data_.size() != static_cast<std::size_t>(height) * width * kChannels)
    throw DimensionMismatch("image data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(height) + "x" +
                            std::to_string(width) + "x3");
}

PatchGrid split(int image_height, int image_width, int patch_height, int patch_width) {
  if (patch_height < 1 || patch_width < 1)
    throw InvalidArgument("patch dimensions must be >= 1");
  PatchGrid grid;
  grid.image_height = image_height;
  grid.image_width = image_width;
  grid.patch_height = patch_height;
  grid.patch_width = patch_width;
  for (int r = 0; r < image_height; r += patch_height) {
    for (int c = 0; c < image_width; c += patch_width) {
      grid.entries.push_back({r, c, std::min(patch_height, image_height - r),
                              std::min(patch_width, image_width - c)});
    }
  }
  return grid;
}

PatchGrid split(const Image& image, int patch_height, int patch_width) {
  return split(image.height(), image.width(), patch_height, patch_width);
}

Image extract(const Image& image, const PatchGrid& grid, std::size_t index) {
  if (index >= grid.size())
    throw InvalidArgument("patch index " + std::to_string(index) + " out of range (N=" +
                          std::to_string(grid.size()) + ")");
  if (image.height() != grid.image_height || image.width() != grid.image_width)
    throw DimensionMismatch("grid does not belong to this image");
  const PatchEntry& e = grid.entries[index];
  Image patch(e.height, e.width);
  const auto src = image.data();
  auto dst = patch.data();
  const std::size_t row_len = static_cast<std::size_t>(e.width) * Image::kChannels;
  for (int r = 0; r < e.height; ++r) {
    const std::size_t src_off =
        (static_cast<std::size_t>(e.row + r) * image.width() + e.col) * Image::kChannels;
    std::copy_n(src.begin() + src_off, row_len, dst.begin() + r * row_len);
  }
  return patch;
}

Image concat(const PatchGrid& grid, std::span<const Image> patches) {
  if (patches.size() != grid.size())
    throw DimensionMismatch("expected " + std::to_string(grid.size()) + " patches, got " +
                            std::to_string(patches.size()));
  Image out(grid.image_height, grid.image_width);
  auto dst = out.data();
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const PatchEntry& e = grid.entries[i];
    const Image& p = patches[i];
    if (p.height() != e.height || p.width() != e.width)
      throw DimensionMismatch("patch " + std::to_string(i) + " is " +
                              std::to_string(p.height()) + "x" + std::to_string(p.width()) +
                              ", grid expects " + std::to_string(e.height) + "x" +
                              std::to_string(e.width));
    const auto src = p.data();
    const std::size_t row_len = static_cast<std::size_t>(e.width) * Image::kChannels;
    for (int r = 0; r < e.height; ++r) {
      const std::size_t dst_off =
          (static_cast<std::size_t>(e.row + r) * out.width() + e.col) * Image::kChannels;
      std::copy_n(src.begin() + r * row_len, row_len, dst.begin() + dst_off);
    }
  }
  return out;
}

Plane to_luminance(const Image& image) {
  Plane lum(image.height(), image.width());
  const auto src = image.data();
  for (std::size_t i = 0; i < lum.data.size(); ++i) {
    lum.data[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  }
  return lum;
}

namespace {

double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// sRGB primaries, D65.
constexpr double kRgbToXyz[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                    {0.2126729, 0.7151522, 0.0721750},
                                    {0.0193339, 0.1191920, 0.9503041}};

// White taken as the image of RGB (1,1,1) so neutral inputs land on a* = b* = 0.
constexpr double kWhite[3] = {kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
                              kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
                              kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2]};

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

} // namespace

Lab srgb_pixel_to_lab(double r, double g, double b) {
  const double lin[3] = {srgb_decode(r), srgb_decode(g), srgb_decode(b)};
  double f[3];
  for (int i = 0; i < 3; ++i) {
    const double xyz =
        kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    f[i] = lab_f(xyz / kWhite[i]);
  }
  return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

std::vector<Lab> srgb_to_lab(const Image& image) {
  std::vector<Lab> out(image.pixel_count());
  const auto src = image.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = srgb_pixel_to_lab(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  return out;
}

} // namespace dda

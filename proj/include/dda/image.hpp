// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace dda {

/// Interleaved RGB raster with double-precision sRGB samples, nominally in [0,1].
/// Row-major, three channels per pixel in R,G,B order.
class Image {
public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, double fill = 0.0);
  Image(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Image& other) const = default;

private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Single-channel row-major plane.
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

using Lab = std::array<double, 3>;

/// One tile of a PatchGrid: origin plus actual extent (edge tiles may be smaller).
struct PatchEntry {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;

  bool operator==(const PatchEntry&) const = default;
};

/// Row-major tiling of an image into nominal patch_height x patch_width tiles.
struct PatchGrid {
  int image_height = 0;
  int image_width = 0;
  int patch_height = 0;
  int patch_width = 0;
  std::vector<PatchEntry> entries;

  std::size_t size() const { return entries.size(); }
};

PatchGrid split(const Image& image, int patch_height, int patch_width);
PatchGrid split(int image_height, int image_width, int patch_height, int patch_width);

Image extract(const Image& image, const PatchGrid& grid, std::size_t index);

/// Writes every patch at its grid origin. Throws DimensionMismatch naming the
/// first offending index.
Image concat(const PatchGrid& grid, std::span<const Image> patches);

/// Rec. 601 luma weights applied directly to the stored sRGB samples.
Plane to_luminance(const Image& image);

/// sRGB (IEC 61966-2-1) -> linear -> XYZ -> CIELAB, D65 white.
Lab srgb_pixel_to_lab(double r, double g, double b);
std::vector<Lab> srgb_to_lab(const Image& image);

} // namespace dda

// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/moire_prior.hpp"

#include <cmath>
#include <cstdlib>

#include "dda/error.hpp"

namespace dda {

PriorConfig PriorConfig::with_sigma(double sigma) {
  PriorConfig cfg;
  cfg.gaussian_sigma = sigma;
  cfg.kernel_radius = static_cast<int>(std::ceil(3.0 * sigma));
  cfg.validate();
  return cfg;
}

void PriorConfig::validate() const {
  if (!(gaussian_sigma > 0.0)) throw InvalidArgument("gaussian sigma must be > 0");
  if (kernel_radius < 1) throw InvalidArgument("kernel radius must be >= 1");
}

double colorfulness(const Image& patch) {
  const std::size_t n = patch.pixel_count();
  if (n == 0) throw InvalidArgument("colorfulness of an empty patch");
  const auto px = patch.data();

  double sum_rg = 0.0, sum_yb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    sum_rg += r - g;
    sum_yb += 0.5 * (r + g) - b;
  }
  const double mean_rg = sum_rg / n;
  const double mean_yb = sum_yb / n;

  double ss_rg = 0.0, ss_yb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    const double d_rg = (r - g) - mean_rg;
    const double d_yb = (0.5 * (r + g) - b) - mean_yb;
    ss_rg += d_rg * d_rg;
    ss_yb += d_yb * d_yb;
  }
  return std::sqrt(ss_rg / n + ss_yb / n) +
         PriorConfig::kColorfulnessMeanWeight * std::sqrt(mean_rg * mean_rg + mean_yb * mean_yb);
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    total += taps[i + radius];
  }
  for (double& t : taps) t /= total;
  return taps;
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

namespace {

// One row of each pass. The parallel and serial drivers share these so their
// arithmetic is identical element for element.

void diff_rows_x(const Plane& src, std::span<const double> taps, int radius, int y, Plane& dst) {
  const int w = src.width;
  for (int x = 0; x < w; ++x) {
    const double center = src.at(y, x);
    double acc = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      if (i == 0) continue;
      acc += taps[i + radius] * (src.at(y, reflect101(x + i, w)) - center);
    }
    dst.at(y, x) = acc;
  }
}

void diff_rows_y(const Plane& src, std::span<const double> taps, int radius, int y, Plane& dst) {
  const int h = src.height, w = src.width;
  for (int x = 0; x < w; ++x) {
    const double center = src.at(y, x);
    double acc = 0.0;
    for (int j = -radius; j <= radius; ++j) {
      if (j == 0) continue;
      acc += taps[j + radius] * (src.at(reflect101(y + j, h), x) - center);
    }
    dst.at(y, x) = acc;
  }
}

void combine_row(const Plane& dx, const Plane& dy, std::span<const double> taps, int radius, int y,
                 Plane& out) {
  const int h = dx.height, w = dx.width;
  for (int x = 0; x < w; ++x) {
    double blurred_dx = 0.0;
    for (int j = -radius; j <= radius; ++j)
      blurred_dx += taps[j + radius] * dx.at(reflect101(y + j, h), x);
    // G_y G_x L - L = G_y (G_x L - L) + (G_y L - L)
    out.at(y, x) = std::abs(blurred_dx + dy.at(y, x));
  }
}

} // namespace

Plane highpass_residual(const Plane& lum, const PriorConfig& cfg) {
  cfg.validate();
  const auto taps = gaussian_kernel(cfg.gaussian_sigma, cfg.kernel_radius);
  const int r = cfg.kernel_radius;
  Plane dx(lum.height, lum.width), dy(lum.height, lum.width), out(lum.height, lum.width);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < lum.height; ++y) {
    diff_rows_x(lum, taps, r, y, dx);
    diff_rows_y(lum, taps, r, y, dy);
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < lum.height; ++y) combine_row(dx, dy, taps, r, y, out);
  return out;
}

Plane highpass_residual_serial(const Plane& lum, const PriorConfig& cfg) {
  cfg.validate();
  const auto taps = gaussian_kernel(cfg.gaussian_sigma, cfg.kernel_radius);
  const int r = cfg.kernel_radius;
  Plane dx(lum.height, lum.width), dy(lum.height, lum.width), out(lum.height, lum.width);
  for (int y = 0; y < lum.height; ++y) {
    diff_rows_x(lum, taps, r, y, dx);
    diff_rows_y(lum, taps, r, y, dy);
  }
  for (int y = 0; y < lum.height; ++y) combine_row(dx, dy, taps, r, y, out);
  return out;
}

Plane highpass(const Image& patch, const PriorConfig& cfg) {
  return highpass_residual(to_luminance(patch), cfg);
}

namespace {

MoireScore score_from(const Image& patch, const Plane& freq) {
  MoireScore s;
  s.colorfulness = colorfulness(patch);
  double total = 0.0;
  for (double v : freq.data) total += v;
  s.frequency_mean = total / static_cast<double>(freq.data.size());
  s.score = s.colorfulness * s.frequency_mean;
  return s;
}

} // namespace

MoireScore moire_score(const Image& patch, const PriorConfig& cfg) {
  if (patch.empty()) throw InvalidArgument("moire score of an empty patch");
  return score_from(patch, highpass(patch, cfg));
}

std::vector<MoireScore> score_grid(const Image& image, const PatchGrid& grid,
                                   const PriorConfig& cfg) {
  if (image.height() != grid.image_height || image.width() != grid.image_width)
    throw DimensionMismatch("grid does not belong to this image");
  cfg.validate();
  std::vector<MoireScore> scores(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  // Patch-level parallelism; the per-patch filter runs serially inside.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Image patch = extract(image, grid, static_cast<std::size_t>(i));
    scores[i] = score_from(patch, highpass_residual_serial(to_luminance(patch), cfg));
  }
  return scores;
}

std::vector<MoireScore> score_grid_serial(const Image& image, const PatchGrid& grid,
                                          const PriorConfig& cfg) {
  if (image.height() != grid.image_height || image.width() != grid.image_width)
    throw DimensionMismatch("grid does not belong to this image");
  std::vector<MoireScore> scores(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Image patch = extract(image, grid, i);
    scores[i] = score_from(patch, highpass_residual_serial(to_luminance(patch), cfg));
  }
  return scores;
}

} // namespace dda

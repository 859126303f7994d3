// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dda/image.hpp"

namespace dda {

struct PriorConfig {
  static constexpr double kColorfulnessMeanWeight = 0.3;

  double gaussian_sigma = 5.0;
  int kernel_radius = 15;  // ceil(3 * sigma)

  /// Config with the radius derived as ceil(3 * sigma).
  static PriorConfig with_sigma(double sigma);
  void validate() const;
};

/// score == colorfulness * frequency_mean.
struct MoireScore {
  double colorfulness = 0.0;
  double frequency_mean = 0.0;
  double score = 0.0;
};

/// Opponent-channel colorfulness over the pixel cloud of a patch:
/// sqrt(var(rg) + var(yb)) + 0.3 * sqrt(mean(rg)^2 + mean(yb)^2),
/// with rg = R - G, yb = (R + G) / 2 - B and population statistics.
double colorfulness(const Image& patch);

/// Normalized 1-D Gaussian taps over [-radius, radius].
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Reflect-101 border index for a coordinate that may lie outside [0, n).
int reflect101(int i, int n);

/// |L - G_sigma * L| on the luminance plane, separable Gaussian with
/// reflect-101 borders. The residual is formed from neighbour differences so
/// constant regions produce exact zeros. OpenMP over rows.
Plane highpass(const Image& patch, const PriorConfig& cfg);
Plane highpass_residual(const Plane& luminance, const PriorConfig& cfg);

/// Serial reference of highpass_residual; bit-identical output.
Plane highpass_residual_serial(const Plane& luminance, const PriorConfig& cfg);

MoireScore moire_score(const Image& patch, const PriorConfig& cfg);

/// Per-patch scores, index-aligned with the grid. OpenMP over patches.
std::vector<MoireScore> score_grid(const Image& image, const PatchGrid& grid,
                                   const PriorConfig& cfg);
std::vector<MoireScore> score_grid_serial(const Image& image, const PatchGrid& grid,
                                          const PriorConfig& cfg);

} // namespace dda

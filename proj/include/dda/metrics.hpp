// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dda/image.hpp"

namespace dda {

struct MetricResult {
  double psnr_db = 0.0;  // +inf when the images are identical
  double ssim = 0.0;
  double delta_e = 0.0;
};

/// 10 log10(1 / MSE) with peak 1.0.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Single-scale SSIM on luminance, Gaussian window, averaged over all valid
/// window positions. Inputs smaller than the window use one global window.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// CIEDE2000 colour difference with kL = kC = kH = 1.
double ciede2000(const Lab& lab1, const Lab& lab2);

/// Mean per-pixel CIEDE2000 after sRGB -> Lab (D65).
double delta_e_image(const Image& a, const Image& b);

MetricResult compute_metrics(const Image& a, const Image& b);

} // namespace dda

// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dda/error.hpp"
#include "dda/moire_prior.hpp"

namespace dda {
namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width())
    throw DimensionMismatch(std::string(what) + ": image dimensions differ (" +
                            std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                            " vs " + std::to_string(b.height()) + "x" +
                            std::to_string(b.width()) + ")");
  if (a.empty()) throw InvalidArgument(std::string(what) + ": empty images");
}

constexpr double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
constexpr double rad(double deg) { return deg * std::numbers::pi / 180.0; }

// 'valid' separable filtering of a plane with a normalized 1-D kernel.
Plane filter_valid(const Plane& src, const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int oh = src.height - k + 1, ow = src.width - k + 1;
  Plane rows(src.height, ow), out(oh, ow);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[i] * src.at(y, x + i);
      rows.at(y, x) = acc;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += taps[i] * rows.at(y + i, x);
      out.at(y, x) = acc;
    }
  return out;
}

double ssim_term(double mx, double my, double sxx, double syy, double sxy, double c1, double c2) {
  return ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
         ((mx * mx + my * my + c1) * (sxx + syy + c2));
}

} // namespace

double psnr(const Image& a, const Image& b) {
  require_same_dims(a, b, "psnr");
  const auto x = a.data(), y = b.data();
  // Neumaier summation keeps the mean of many equal terms exact.
  double acc = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    const double term = d * d;
    const double t = acc + term;
    carry += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
    acc = t;
  }
  const double mse = (acc + carry) / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b, const SsimOptions& o) {
  require_same_dims(a, b, "ssim");
  const Plane x = to_luminance(a), y = to_luminance(b);
  const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
  const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);

  if (x.height < o.window || x.width < o.window) {
    const double n = static_cast<double>(x.data.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      mx += x.data[i];
      my += y.data[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
      const double dx = x.data[i] - mx, dy = y.data[i] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    return ssim_term(mx, my, sxx / n, syy / n, sxy / n, c1, c2);
  }

  const auto taps = gaussian_kernel(o.sigma, o.window / 2);
  Plane xx(x.height, x.width), yy(x.height, x.width), xy(x.height, x.width);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    xx.data[i] = x.data[i] * x.data[i];
    yy.data[i] = y.data[i] * y.data[i];
    xy.data[i] = x.data[i] * y.data[i];
  }
  const Plane mu_x = filter_valid(x, taps), mu_y = filter_valid(y, taps);
  const Plane e_xx = filter_valid(xx, taps), e_yy = filter_valid(yy, taps),
              e_xy = filter_valid(xy, taps);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.data.size(); ++i) {
    const double mx = mu_x.data[i], my = mu_y.data[i];
    total += ssim_term(mx, my, e_xx.data[i] - mx * mx, e_yy.data[i] - my * my,
                       e_xy.data[i] - mx * my, c1, c2);
  }
  return total / static_cast<double>(mu_x.data.size());
}

double ciede2000(const Lab& lab1, const Lab& lab2) {
  const auto [l1, a1, b1] = lab1;
  const auto [l2, a2, b2] = lab2;

  const double c1 = std::hypot(a1, b1), c2 = std::hypot(a2, b2);
  const double c_bar = 0.5 * (c1 + c2);
  const double c_bar7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + std::pow(25.0, 7.0))));
  const double a1p = (1.0 + g) * a1, a2p = (1.0 + g) * a2;
  const double c1p = std::hypot(a1p, b1), c2p = std::hypot(a2p, b2);

  auto hue = [](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = deg(std::atan2(b, ap));
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue(b1, a1p), h2p = hue(b2, a2p);

  const double dlp = l2 - l1;
  const double dcp = c2p - c1p;
  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > 180.0) dhp -= 360.0;
    else if (dhp < -180.0) dhp += 360.0;
  }
  const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(rad(dhp) / 2.0);

  const double lp_bar = 0.5 * (l1 + l2);
  const double cp_bar = 0.5 * (c1p + c2p);
  double hp_bar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= 180.0) hp_bar *= 0.5;
    else if (h1p + h2p < 360.0) hp_bar = 0.5 * (h1p + h2p + 360.0);
    else hp_bar = 0.5 * (h1p + h2p - 360.0);
  }

  const double t = 1.0 - 0.17 * std::cos(rad(hp_bar - 30.0)) + 0.24 * std::cos(rad(2.0 * hp_bar)) +
                   0.32 * std::cos(rad(3.0 * hp_bar + 6.0)) -
                   0.20 * std::cos(rad(4.0 * hp_bar - 63.0));
  const double d_theta = 30.0 * std::exp(-((hp_bar - 275.0) / 25.0) * ((hp_bar - 275.0) / 25.0));
  const double cp_bar7 = std::pow(cp_bar, 7.0);
  const double rc = 2.0 * std::sqrt(cp_bar7 / (cp_bar7 + std::pow(25.0, 7.0)));
  const double l50 = (lp_bar - 50.0) * (lp_bar - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * cp_bar;
  const double sh = 1.0 + 0.015 * cp_bar * t;
  const double rt = -std::sin(rad(2.0 * d_theta)) * rc;

  const double tl = dlp / sl, tc = dcp / sc, th = dHp / sh;
  return std::sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

double delta_e_image(const Image& a, const Image& b) {
  require_same_dims(a, b, "delta_e");
  const auto la = srgb_to_lab(a), lb = srgb_to_lab(b);
  double total = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) total += ciede2000(la[i], lb[i]);
  return total / static_cast<double>(la.size());
}

MetricResult compute_metrics(const Image& a, const Image& b) {
  return {psnr(a, b), ssim(a, b), delta_e_image(a, b)};
}

} // namespace dda

// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dda/error.hpp"
#include "dda/metrics.hpp"
#include "test_util.hpp"

namespace dda {
namespace {

using testing::random_image;

TEST(Psnr, IdenticalIsInfinite) {
  const Image x = random_image(8, 8, 1);
  EXPECT_EQ(psnr(x, x), std::numeric_limits<double>::infinity());
}

TEST(Psnr, ConstantOffsetIsTwentyDb) {
  const Image a(16, 16, 0.3), b(16, 16, 0.4);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
  const Image c(7, 5, 0.0), d(7, 5, 0.1);
  EXPECT_EQ(psnr(c, d), 20.0);
}

TEST(Psnr, SymmetricAndMismatchThrows) {
  const Image a = random_image(9, 9, 2), b = random_image(9, 9, 3);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_THROW(psnr(a, Image(9, 8)), DimensionMismatch);
  EXPECT_THROW(ssim(a, Image(8, 9)), DimensionMismatch);
  EXPECT_THROW(delta_e_image(a, Image(8, 9)), DimensionMismatch);
}

// Windowed SSIM computed position by position with the raw 2-D Gaussian window.
double ssim_oracle(const Image& a, const Image& b) {
  const Plane la = to_luminance(a), lb = to_luminance(b);
  const int win = 11, r = 5;
  std::vector<double> w(win * win);
  double total = 0;
  for (int y = 0; y < win; ++y)
    for (int x = 0; x < win; ++x) total += w[y * win + x] = std::exp(-((y - r) * (y - r) + (x - r) * (x - r)) / (2 * 1.5 * 1.5));
  for (double& v : w) v /= total;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double sum = 0;
  int count = 0;
  for (int y0 = 0; y0 + win <= la.height; ++y0)
    for (int x0 = 0; x0 + win <= la.width; ++x0) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
          const double g = w[y * win + x], va = la.at(y0 + y, x0 + x), vb = lb.at(y0 + y, x0 + x);
          ma += g * va;
          mb += g * vb;
          saa += g * va * va;
          sbb += g * vb * vb;
          sab += g * va * vb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / count;
}

TEST(Ssim, SelfIsExactlyOne) {
  for (int seed = 0; seed < 5; ++seed) {
    const Image x = random_image(20 + seed, 30, seed);
    EXPECT_EQ(ssim(x, x), 1.0);
  }
  const Image tiny = random_image(4, 6, 9);
  EXPECT_EQ(ssim(tiny, tiny), 1.0);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const Image a(24, 24, 0.2), b(24, 24, 0.7);
  const double c1 = 1e-4;
  const double expected = (2 * 0.2 * 0.7 + c1) / (0.2 * 0.2 + 0.7 * 0.7 + c1);
  EXPECT_NEAR(ssim(a, b), expected, 1e-12);
}

TEST(Ssim, MatchesWindowOracle) {
  for (int seed = 0; seed < 4; ++seed) {
    const Image a = random_image(23, 31, seed);
    Image b = a;
    for (double& v : b.data()) v = 0.7 * v + 0.1;
    EXPECT_NEAR(ssim(a, b), ssim_oracle(a, b), 1e-10);
    EXPECT_NEAR(ssim(a, random_image(23, 31, seed + 50)), ssim_oracle(a, random_image(23, 31, seed + 50)), 1e-10);
  }
}

TEST(Ssim, PropertySymmetricAndDecreasingWithNoise) {
  const Image clean = random_image(32, 32, 4, 0.2, 0.8);
  const Image noise = random_image(32, 32, 5, -1.0, 1.0);
  double prev = 1.0;
  for (double sigma : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    Image noisy = clean;
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy.data()[i] += sigma * noise.data()[i];
    const double s = ssim(clean, noisy);
    EXPECT_LT(s, prev);
    EXPECT_NEAR(s, ssim(noisy, clean), 1e-14);
    prev = s;
  }
}

// Published CIEDE2000 verification pairs: L1 a1 b1, L2 a2 b2, dE00.
const double kSharma[34][7] = {
    {50.0000, 2.6772, -79.7751, 50.0000, 0.0000, -82.7485, 2.0425},
    {50.0000, 3.1571, -77.2803, 50.0000, 0.0000, -82.7485, 2.8615},
    {50.0000, 2.8361, -74.0200, 50.0000, 0.0000, -82.7485, 3.4412},
    {50.0000, -1.3802, -84.2814, 50.0000, 0.0000, -82.7485, 1.0000},
    {50.0000, -1.1848, -84.8006, 50.0000, 0.0000, -82.7485, 1.0000},
    {50.0000, -0.9009, -85.5211, 50.0000, 0.0000, -82.7485, 1.0000},
    {50.0000, 0.0000, 0.0000, 50.0000, -1.0000, 2.0000, 2.3669},
    {50.0000, -1.0000, 2.0000, 50.0000, 0.0000, 0.0000, 2.3669},
    {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0009, 7.1792},
    {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0010, 7.1792},
    {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0011, 7.2195},
    {50.0000, 2.4900, -0.0010, 50.0000, -2.4900, 0.0012, 7.2195},
    {50.0000, -0.0010, 2.4900, 50.0000, 0.0009, -2.4900, 4.8045},
    {50.0000, -0.0010, 2.4900, 50.0000, 0.0010, -2.4900, 4.8045},
    {50.0000, -0.0010, 2.4900, 50.0000, 0.0011, -2.4900, 4.7461},
    {50.0000, 2.5000, 0.0000, 50.0000, 0.0000, -2.5000, 4.3065},
    {50.0000, 2.5000, 0.0000, 73.0000, 25.0000, -18.0000, 27.1492},
    {50.0000, 2.5000, 0.0000, 61.0000, -5.0000, 29.0000, 22.8977},
    {50.0000, 2.5000, 0.0000, 56.0000, -27.0000, -3.0000, 31.9030},
    {50.0000, 2.5000, 0.0000, 58.0000, 24.0000, 15.0000, 19.4535},
    {50.0000, 2.5000, 0.0000, 50.0000, 3.1736, 0.5854, 1.0000},
    {50.0000, 2.5000, 0.0000, 50.0000, 3.2972, 0.0000, 1.0000},
    {50.0000, 2.5000, 0.0000, 50.0000, 1.8634, 0.5757, 1.0000},
    {50.0000, 2.5000, 0.0000, 50.0000, 3.2592, 0.3350, 1.0000},
    {60.2574, -34.0099, 36.2677, 60.4626, -34.1751, 39.4387, 1.2644},
    {63.0109, -31.0961, -5.8663, 62.8187, -29.7946, -4.0864, 1.2630},
    {61.2901, 3.7196, -5.3901, 61.4292, 2.2480, -4.9620, 1.8731},
    {35.0831, -44.1164, 3.7933, 35.0232, -40.0716, 1.5901, 1.8645},
    {22.7233, 20.0904, -46.6940, 23.0331, 14.9730, -42.5619, 2.0373},
    {36.4612, 47.8580, 18.3852, 36.2715, 50.5065, 21.2231, 1.4146},
    {90.8027, -2.0831, 1.4410, 91.1528, -1.6435, 0.0447, 1.4441},
    {90.9257, -0.5406, -0.9208, 88.6381, -0.8985, -0.7239, 1.5381},
    {6.7747, -0.2908, -2.4247, 5.8714, -0.0985, -2.2286, 0.6377},
    {2.0776, 0.0795, -1.1350, 0.9033, -0.0636, -0.5514, 0.9082},
};

TEST(Ciede2000, PublishedPairs) {
  for (int i = 0; i < 34; ++i) {
    const auto& r = kSharma[i];
    const Lab a{r[0], r[1], r[2]}, b{r[3], r[4], r[5]};
    // Table values are printed to 4 decimals.
    EXPECT_NEAR(ciede2000(a, b), r[6], 5e-5) << "pair " << i + 1;
    EXPECT_NEAR(ciede2000(b, a), r[6], 5e-5) << "pair " << i + 1 << " swapped";
  }
}

TEST(Ciede2000, IdentityIsZero) {
  EXPECT_EQ(ciede2000({50, 10, -20}, {50, 10, -20}), 0.0);
  EXPECT_EQ(ciede2000({0, 0, 0}, {0, 0, 0}), 0.0);
}

TEST(DeltaE, ImageMeans) {
  const Image a = random_image(10, 12, 3);
  EXPECT_EQ(delta_e_image(a, a), 0.0);

  Image b = a;
  // Alter the top half only: the mean is half the per-pixel difference times the changed count.
  double per_pixel_sum = 0;
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 12; ++c) {
      b.at(r, c, 0) = std::min(1.0, a.at(r, c, 0) + 0.2);
      per_pixel_sum += ciede2000(srgb_pixel_to_lab(a.at(r, c, 0), a.at(r, c, 1), a.at(r, c, 2)),
                                 srgb_pixel_to_lab(b.at(r, c, 0), b.at(r, c, 1), b.at(r, c, 2)));
    }
  EXPECT_NEAR(delta_e_image(a, b), per_pixel_sum / 120.0, 1e-12);
}

TEST(DeltaE, UniformShiftEqualsPixelDifference) {
  const Image a(6, 6, 0.5);
  Image b(6, 6, 0.5);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) b.at(r, c, 2) = 0.8;
  EXPECT_NEAR(delta_e_image(a, b), ciede2000(srgb_pixel_to_lab(0.5, 0.5, 0.5), srgb_pixel_to_lab(0.5, 0.5, 0.8)), 1e-12);
}

TEST(Metrics, ComputeAllThree) {
  const Image a = random_image(16, 16, 7);
  const MetricResult self = compute_metrics(a, a);
  EXPECT_TRUE(std::isinf(self.psnr_db));
  EXPECT_EQ(self.ssim, 1.0);
  EXPECT_EQ(self.delta_e, 0.0);
  EXPECT_THROW(compute_metrics(Image(), Image()), InvalidArgument);
}

} // namespace
} // namespace dda

// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/conv.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstring>

#include "dda/error.hpp"

namespace dda::kernels {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMajor, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;

void check_shape(const ConvShape& s, std::span<const double> input, std::size_t out_len) {
  if (s.ksize < 1 || s.ksize % 2 == 0) throw InvalidArgument("kernel size must be odd");
  if (input.size() != static_cast<std::size_t>(s.c_in) * s.pixels() ||
      out_len != static_cast<std::size_t>(s.c_out) * s.pixels())
    throw DimensionMismatch("conv buffer sizes do not match shape");
}

std::size_t tile_count(const ConvShape& s) {
  return (s.pixels() + kPixelTile - 1) / kPixelTile;
}

// Unfolds pixels [p0, p0 + len) into col[(ci*k + ky)*k + kx][j].
void im2col_tile(const ConvShape& s, std::span<const double> input, std::size_t p0,
                 std::size_t len, double* col) {
  const int k = s.ksize, pad = k / 2, h = s.height, w = s.width;
  const std::size_t plane = s.pixels();
  for (int ci = 0; ci < s.c_in; ++ci) {
    const double* src = input.data() + ci * plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* dst = col + (static_cast<std::size_t>(ci * k + ky) * k + kx) * len;
        int y = static_cast<int>(p0 / w), x = static_cast<int>(p0 % w);
        std::size_t j = 0;
        while (j < len) {
          const int sy = y + ky - pad;
          const int run = std::min<int>(w - x, static_cast<int>(len - j));
          if (sy < 0 || sy >= h) {
            std::fill_n(dst + j, run, 0.0);
          } else {
            const double* row = src + static_cast<std::size_t>(sy) * w;
            for (int t = 0; t < run; ++t) {
              const int sx = x + t + kx - pad;
              dst[j + t] = (sx >= 0 && sx < w) ? row[sx] : 0.0;
            }
          }
          j += run;
          x = 0;
          ++y;
        }
      }
    }
  }
}

void forward_tile(const ConvShape& s, const FilterBank& f, std::span<const double> input,
                  std::span<double> output, std::size_t tile, std::vector<double>& col) {
  const std::size_t plane = s.pixels();
  const std::size_t p0 = tile * kPixelTile;
  const std::size_t len = std::min<std::size_t>(kPixelTile, plane - p0);
  const std::size_t K = s.patch_len();
  col.resize(K * len);
  im2col_tile(s, input, p0, len, col.data());

  ConstStridedMap weights(f.kernel, s.c_out, K, Eigen::OuterStride<>(f.filter_stride));
  Eigen::Map<const RowMajor> cols(col.data(), K, len);
  StridedMap out(output.data() + p0, s.c_out, len, Eigen::OuterStride<>(plane));
  out.noalias() = weights * cols;
  if (f.bias) {
    for (int co = 0; co < s.c_out; ++co) out.row(co).array() += f.bias[co];
  }
}

} // namespace

void conv2d_forward(const ConvShape& s, const FilterBank& f, std::span<const double> input,
                    std::span<double> output) {
  check_shape(s, input, output.size());
  const auto tiles = static_cast<std::ptrdiff_t>(tile_count(s));
#pragma omp parallel
  {
    std::vector<double> col;
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < tiles; ++t)
      forward_tile(s, f, input, output, static_cast<std::size_t>(t), col);
  }
}

void conv2d_forward_reference(const ConvShape& s, const FilterBank& f,
                              std::span<const double> input, std::span<double> output) {
  check_shape(s, input, output.size());
  const int k = s.ksize, pad = k / 2, h = s.height, w = s.width;
  const std::size_t plane = s.pixels();
  for (int co = 0; co < s.c_out; ++co) {
    const double* filt = f.kernel + co * f.filter_stride;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = f.bias ? f.bias[co] : 0.0;
        for (int ci = 0; ci < s.c_in; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int sy = y + ky - pad;
            if (sy < 0 || sy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int sx = x + kx - pad;
              if (sx < 0 || sx >= w) continue;
              acc += filt[(ci * k + ky) * k + kx] * input[ci * plane + sy * w + sx];
            }
          }
        }
        output[co * plane + y * w + x] = acc;
      }
    }
  }
}

std::vector<double> transpose_flip_filters(const ConvShape& s, const FilterBank& f) {
  const int k = s.ksize;
  std::vector<double> out(static_cast<std::size_t>(s.c_in) * s.c_out * k * k);
  for (int co = 0; co < s.c_out; ++co)
    for (int ci = 0; ci < s.c_in; ++ci)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          out[((static_cast<std::size_t>(ci) * s.c_out + co) * k + (k - 1 - ky)) * k +
              (k - 1 - kx)] = f.kernel[co * f.filter_stride + (ci * k + ky) * k + kx];
  return out;
}

void conv2d_backward(const ConvShape& s, const FilterBank& f, std::span<const double> input,
                     std::span<const double> grad_output, std::span<double> grad_input,
                     const FilterGrad& grad) {
  check_shape(s, input, grad_output.size());
  const std::size_t plane = s.pixels();
  const std::size_t K = s.patch_len();
  const auto tiles = static_cast<std::ptrdiff_t>(tile_count(s));

  // Per-tile partial kernel gradients, reduced below in tile order.
  std::vector<double> partial(static_cast<std::size_t>(tiles) * s.c_out * K);
#pragma omp parallel
  {
    std::vector<double> col;
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < tiles; ++t) {
      const std::size_t p0 = static_cast<std::size_t>(t) * kPixelTile;
      const std::size_t len = std::min<std::size_t>(kPixelTile, plane - p0);
      col.resize(K * len);
      im2col_tile(s, input, p0, len, col.data());
      Eigen::Map<const RowMajor> cols(col.data(), K, len);
      ConstStridedMap g(grad_output.data() + p0, s.c_out, len, Eigen::OuterStride<>(plane));
      Eigen::Map<RowMajor> dst(partial.data() + t * s.c_out * K, s.c_out, K);
      dst.noalias() = g * cols.transpose();
    }
  }
  for (std::ptrdiff_t t = 0; t < tiles; ++t) {
    const double* src = partial.data() + t * s.c_out * K;
    for (int co = 0; co < s.c_out; ++co) {
      double* dst = grad.kernel + co * grad.filter_stride;
      for (std::size_t q = 0; q < K; ++q) dst[q] += src[co * K + q];
    }
  }
  if (grad.bias) {
    for (int co = 0; co < s.c_out; ++co) {
      double acc = 0.0;
      const double* g = grad_output.data() + co * plane;
      for (std::size_t p = 0; p < plane; ++p) acc += g[p];
      grad.bias[co] += acc;
    }
  }

  if (!grad_input.empty()) {
    if (grad_input.size() != static_cast<std::size_t>(s.c_in) * plane)
      throw DimensionMismatch("grad_input size does not match shape");
    const auto flipped = transpose_flip_filters(s, f);
    const ConvShape back{s.height, s.width, s.c_out, s.c_in, s.ksize};
    const FilterBank back_filters{
        flipped.data(), static_cast<std::size_t>(s.c_out) * s.ksize * s.ksize, nullptr};
    conv2d_forward(back, back_filters, grad_output, grad_input);
  }
}

void conv2d_backward_reference(const ConvShape& s, const FilterBank& f,
                               std::span<const double> input,
                               std::span<const double> grad_output,
                               std::span<double> grad_input, const FilterGrad& grad) {
  check_shape(s, input, grad_output.size());
  const int k = s.ksize, pad = k / 2, h = s.height, w = s.width;
  const std::size_t plane = s.pixels();
  if (!grad_input.empty()) std::fill(grad_input.begin(), grad_input.end(), 0.0);
  for (int co = 0; co < s.c_out; ++co) {
    const double* filt = f.kernel + co * f.filter_stride;
    double* dfilt = grad.kernel + co * grad.filter_stride;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = grad_output[co * plane + y * w + x];
        if (grad.bias) grad.bias[co] += g;
        for (int ci = 0; ci < s.c_in; ++ci) {
          for (int ky = 0; ky < k; ++ky) {
            const int sy = y + ky - pad;
            if (sy < 0 || sy >= h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int sx = x + kx - pad;
              if (sx < 0 || sx >= w) continue;
              const std::size_t in_idx = ci * plane + sy * w + sx;
              dfilt[(ci * k + ky) * k + kx] += g * input[in_idx];
              if (!grad_input.empty()) grad_input[in_idx] += g * filt[(ci * k + ky) * k + kx];
            }
          }
        }
      }
    }
  }
}

} // namespace dda::kernels

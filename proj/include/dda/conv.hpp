// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Stride-1, same-padded (zeros) 2-D convolution on planar CHW double buffers.
//
// Every kernel comes in two flavours: the production path (im2col over fixed
// pixel tiles + GEMM, tiles spread across OpenMP threads) and a direct-loop
// serial reference used by tests and the benchmark. Production results do not
// depend on the thread count because the tile decomposition is fixed.

namespace dda::kernels {

inline constexpr int kPixelTile = 1024;

struct ConvShape {
  int height = 0;
  int width = 0;
  int c_in = 0;
  int c_out = 0;
  int ksize = 3;

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t patch_len() const { return static_cast<std::size_t>(c_in) * ksize * ksize; }
};

/// Filters laid out [c_out][c_in][k][k], filter f starting at kernel + f *
/// filter_stride. filter_stride may exceed c_in*k*k, which is how a channel
/// prefix of a wider layer is addressed in place.
struct FilterBank {
  const double* kernel = nullptr;
  std::size_t filter_stride = 0;
  const double* bias = nullptr;  // may be null (no bias)
};

/// Gradient destination with the same strided layout as FilterBank.
/// Results are accumulated (+=).
struct FilterGrad {
  double* kernel = nullptr;
  std::size_t filter_stride = 0;
  double* bias = nullptr;
};

void conv2d_forward(const ConvShape& shape, const FilterBank& filters,
                    std::span<const double> input, std::span<double> output);

void conv2d_forward_reference(const ConvShape& shape, const FilterBank& filters,
                              std::span<const double> input, std::span<double> output);

/// grad_input is overwritten; pass an empty span to skip it.
void conv2d_backward(const ConvShape& shape, const FilterBank& filters,
                     std::span<const double> input, std::span<const double> grad_output,
                     std::span<double> grad_input, const FilterGrad& grad);

void conv2d_backward_reference(const ConvShape& shape, const FilterBank& filters,
                               std::span<const double> input,
                               std::span<const double> grad_output,
                               std::span<double> grad_input, const FilterGrad& grad);

/// Flipped, channel-transposed copy of a filter bank: the weights that map
/// output gradients back onto inputs. Result is dense [c_in][c_out][k][k].
std::vector<double> transpose_flip_filters(const ConvShape& shape, const FilterBank& filters);

} // namespace dda::kernels

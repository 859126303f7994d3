// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dda/conv.hpp"
#include "dda/error.hpp"
#include "dda/image.hpp"

namespace dda {

/// Plain residual CNN: num_layers 'same' convolutions, ReLU between them,
/// identity on the last layer. RGB in, RGB out at every width.
struct SupernetSpec {
  int num_layers = 6;
  int base_channels = 32;
  int kernel_size = 3;
  bool residual = true;

  void validate() const;
  int full_in_channels(int layer) const { return layer == 0 ? 3 : base_channels; }
  int full_out_channels(int layer) const { return layer == num_layers - 1 ? 3 : base_channels; }

  bool operator==(const SupernetSpec&) const = default;
};

/// Full-width parameters of one layer. kernel is [c_out][c_in][k][k].
struct LayerParams {
  int c_out = 0;
  int c_in = 0;
  int ksize = 0;
  std::vector<double> kernel;
  std::vector<double> bias;

  std::size_t filter_stride() const { return static_cast<std::size_t>(c_in) * ksize * ksize; }
  bool operator==(const LayerParams&) const = default;
};

class SupernetWeights {
public:
  SupernetWeights() = default;
  /// Zero-filled parameters shaped by spec.
  explicit SupernetWeights(const SupernetSpec& spec);

  const SupernetSpec& spec() const { return spec_; }
  std::vector<LayerParams>& layers() { return layers_; }
  const std::vector<LayerParams>& layers() const { return layers_; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const SupernetWeights&) const = default;

private:
  SupernetSpec spec_;
  std::vector<LayerParams> layers_;
};

/// Hidden channel count of a width-w subnet: max(1, round(w * base)).
int hidden_channels(int base_channels, double width);

struct LayerSlice {
  int c_in = 0;
  int c_out = 0;
};

/// Width-w subnet: the first c_out filters and first c_in input channels of
/// every layer, read in place from the shared supernet tensors.
class SubnetView {
public:
  SubnetView(const SupernetWeights& weights, double width);

  double width() const { return width_; }
  const SupernetWeights& weights() const { return *weights_; }
  const std::vector<LayerSlice>& layers() const { return slices_; }
  kernels::FilterBank filters(int layer) const;

private:
  const SupernetWeights* weights_;
  double width_;
  std::vector<LayerSlice> slices_;
};

SubnetView slice(const SupernetWeights& weights, double width);

/// He-uniform kernels (bound sqrt(6 / (c_in * k^2))), zero biases.
SupernetWeights init_weights(const SupernetSpec& spec, std::uint64_t seed);

Image forward(const SubnetView& view, const Image& patch);

/// Same network evaluated with the direct-loop serial conv kernels.
Image forward_reference(const SubnetView& view, const Image& patch);

/// Mean squared error over all samples.
double loss(const Image& output, const Image& target);

/// Full-shaped gradient buffers; entries outside the active slice stay zero.
struct Gradients {
  std::vector<LayerParams> layers;

  static Gradients zeros_like(const SupernetWeights& weights);
  void add(const Gradients& other);
  void scale(double factor);
};

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
};

BackwardResult backward(const SubnetView& view, const Image& patch, const Image& target);

/// Adds this sample's gradients into `grads` and returns its loss.
double accumulate_backward(const SubnetView& view, const Image& patch, const Image& target,
                           Gradients& grads);

/// Adam moments shaped like the full supernet; shared by every width.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<LayerParams> m;
  std::vector<LayerParams> v;

  static AdamState for_weights(const SupernetWeights& weights);
};

struct TrainingPair {
  Image moire;
  Image clean;
  double score = 0.0;
};

/// One Adam update of the width-`width` prefix on the batch-mean loss.
/// Per-sample gradients may be computed in parallel; they are summed in batch
/// order. Returns the batch-mean loss before the update.
double train_step(SupernetWeights& weights, double width, std::span<const TrainingPair> batch,
                  AdamState& adam, double lr);
double train_step(SupernetWeights& weights, double width,
                  std::span<const TrainingPair* const> batch, AdamState& adam, double lr);

/// Compute accounting for a width-w subnet on an h x w tile. Multiply and add
/// are counted separately: 2*h*w*c_in*c_out*k^2 per layer, plus h*w*c_out bias
/// adds, plus h*w*3 for the residual add.
struct LayerFlops {
  std::uint64_t multiply_add = 0;
  std::uint64_t bias = 0;
};

std::vector<LayerFlops> layer_flops(const SupernetSpec& spec, double width, int height,
                                    int width_px);
std::uint64_t flops(const SupernetSpec& spec, double width, int height, int width_px);

/// Parameters read by a width-w subnet.
std::uint64_t param_count(const SupernetSpec& spec, double width);

class WeightsFormatError : public IoError {
public:
  enum class Kind { kFormat, kVersion, kTruncated, kShape, kIo };

  WeightsFormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

/// "DDAW" | u32 version | u32 layers, base, ksize, residual | per layer:
/// u32 c_out, c_in, k, then f64 kernel[c_out*c_in*k*k], f64 bias[c_out].
/// All little-endian.
void save_weights(const SupernetWeights& weights, const std::filesystem::path& path);
SupernetWeights load_weights(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_weights(const SupernetWeights& weights);
SupernetWeights deserialize_weights(std::span<const std::uint8_t> bytes);

} // namespace dda

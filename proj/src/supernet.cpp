// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#include "dda/supernet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace dda {

void SupernetSpec::validate() const {
  if (num_layers < 2) throw InvalidArgument("supernet needs at least 2 layers");
  if (base_channels < 1) throw InvalidArgument("base channel count must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw InvalidArgument("kernel size must be odd and positive");
}

SupernetWeights::SupernetWeights(const SupernetSpec& spec) : spec_(spec) {
  spec.validate();
  for (int l = 0; l < spec.num_layers; ++l) {
    LayerParams p;
    p.c_out = spec.full_out_channels(l);
    p.c_in = spec.full_in_channels(l);
    p.ksize = spec.kernel_size;
    p.kernel.assign(static_cast<std::size_t>(p.c_out) * p.filter_stride(), 0.0);
    p.bias.assign(p.c_out, 0.0);
    layers_.push_back(std::move(p));
  }
}

std::size_t SupernetWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.kernel.size() + l.bias.size();
  return n;
}

bool SupernetWeights::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(layers_.begin(), layers_.end(), [&](const LayerParams& l) {
    return std::all_of(l.kernel.begin(), l.kernel.end(), finite) &&
           std::all_of(l.bias.begin(), l.bias.end(), finite);
  });
}

int hidden_channels(int base_channels, double width) {
  return std::max(1, static_cast<int>(std::lround(width * base_channels)));
}

SubnetView::SubnetView(const SupernetWeights& weights, double width)
    : weights_(&weights), width_(width) {
  if (!(width > 0.0 && width <= 1.0))
    throw InvalidArgument("subnet width " + std::to_string(width) + " outside (0,1]");
  const SupernetSpec& spec = weights.spec();
  const int hidden = hidden_channels(spec.base_channels, width);
  for (int l = 0; l < spec.num_layers; ++l) {
    slices_.push_back({l == 0 ? 3 : hidden, l == spec.num_layers - 1 ? 3 : hidden});
  }
}

kernels::FilterBank SubnetView::filters(int layer) const {
  const LayerParams& p = weights_->layers()[layer];
  return {p.kernel.data(), p.filter_stride(), p.bias.data()};
}

SubnetView slice(const SupernetWeights& weights, double width) {
  return SubnetView(weights, width);
}

SupernetWeights init_weights(const SupernetSpec& spec, std::uint64_t seed) {
  SupernetWeights w(spec);
  std::mt19937_64 rng(seed);
  // 53-bit uniform in [0,1) straight from the engine: identical on every stdlib.
  auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (auto& layer : w.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.filter_stride()));
    for (double& v : layer.kernel) v = (2.0 * uniform01() - 1.0) * bound;
  }
  return w;
}

namespace {

std::vector<double> to_planar(const Image& img) {
  const std::size_t n = img.pixel_count();
  std::vector<double> out(3 * n);
  const auto src = img.data();
  for (std::size_t p = 0; p < n; ++p)
    for (int c = 0; c < 3; ++c) out[c * n + p] = src[3 * p + c];
  return out;
}

Image from_planar(int h, int w, std::span<const double> planar) {
  Image img(h, w);
  const std::size_t n = img.pixel_count();
  auto dst = img.data();
  for (std::size_t p = 0; p < n; ++p)
    for (int c = 0; c < 3; ++c) dst[3 * p + c] = planar[c * n + p];
  return img;
}

struct ForwardTrace {
  // activations[l] is the input of layer l; the last entry is the raw network
  // output before the residual add.
  std::vector<std::vector<double>> activations;
};

template <class ConvFn>
ForwardTrace run_forward(const SubnetView& view, const Image& patch, ConvFn conv) {
  if (patch.empty()) throw InvalidArgument("forward on an empty patch");
  const SupernetSpec& spec = view.weights().spec();
  const int h = patch.height(), w = patch.width();
  ForwardTrace trace;
  trace.activations.push_back(to_planar(patch));
  for (int l = 0; l < spec.num_layers; ++l) {
    const LayerSlice& sl = view.layers()[l];
    const kernels::ConvShape shape{h, w, sl.c_in, sl.c_out, spec.kernel_size};
    std::vector<double> out(static_cast<std::size_t>(sl.c_out) * shape.pixels());
    conv(shape, view.filters(l), trace.activations.back(), out);
    if (l + 1 < spec.num_layers)
      for (double& v : out) v = v > 0.0 ? v : 0.0;
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

Image finish_output(const SubnetView& view, const Image& patch, ForwardTrace& trace) {
  auto& net = trace.activations.back();
  if (view.weights().spec().residual) {
    const auto& in = trace.activations.front();
    for (std::size_t i = 0; i < net.size(); ++i) net[i] += in[i];
  }
  return from_planar(patch.height(), patch.width(), net);
}

} // namespace

Image forward(const SubnetView& view, const Image& patch) {
  auto trace = run_forward(view, patch, [](const auto& s, const auto& f, const auto& in, auto& out) {
    kernels::conv2d_forward(s, f, in, out);
  });
  return finish_output(view, patch, trace);
}

Image forward_reference(const SubnetView& view, const Image& patch) {
  auto trace = run_forward(view, patch, [](const auto& s, const auto& f, const auto& in, auto& out) {
    kernels::conv2d_forward_reference(s, f, in, out);
  });
  return finish_output(view, patch, trace);
}

double loss(const Image& output, const Image& target) {
  if (output.height() != target.height() || output.width() != target.width())
    throw DimensionMismatch("loss: image dimensions differ");
  if (output.empty()) throw InvalidArgument("loss of empty images");
  const auto a = output.data(), b = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

Gradients Gradients::zeros_like(const SupernetWeights& weights) {
  Gradients g;
  g.layers = weights.layers();
  for (auto& l : g.layers) {
    std::fill(l.kernel.begin(), l.kernel.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& dst = layers[l];
    const auto& src = other.layers[l];
    for (std::size_t i = 0; i < dst.kernel.size(); ++i) dst.kernel[i] += src.kernel[i];
    for (std::size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += src.bias[i];
  }
}

void Gradients::scale(double factor) {
  for (auto& l : layers) {
    for (double& v : l.kernel) v *= factor;
    for (double& v : l.bias) v *= factor;
  }
}

double accumulate_backward(const SubnetView& view, const Image& patch, const Image& target,
                           Gradients& grads) {
  if (patch.height() != target.height() || patch.width() != target.width())
    throw DimensionMismatch("backward: patch and target dimensions differ");
  const SupernetSpec& spec = view.weights().spec();
  auto trace = run_forward(view, patch, [](const auto& s, const auto& f, const auto& in, auto& out) {
    kernels::conv2d_forward(s, f, in, out);
  });
  const Image out = finish_output(view, patch, trace);
  const double value = loss(out, target);

  const int h = patch.height(), w = patch.width();
  const std::vector<double> out_planar = to_planar(out);
  const std::vector<double> target_planar = to_planar(target);
  const double scale = 2.0 / static_cast<double>(out_planar.size());
  std::vector<double> grad(out_planar.size());
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] = scale * (out_planar[i] - target_planar[i]);

  std::vector<double> grad_in;
  for (int l = spec.num_layers - 1; l >= 0; --l) {
    const LayerSlice& sl = view.layers()[l];
    const kernels::ConvShape shape{h, w, sl.c_in, sl.c_out, spec.kernel_size};
    LayerParams& gl = grads.layers[l];
    const kernels::FilterGrad fg{gl.kernel.data(), gl.filter_stride(), gl.bias.data()};
    const auto& input = trace.activations[l];
    if (l > 0) {
      grad_in.assign(input.size(), 0.0);
      kernels::conv2d_backward(shape, view.filters(l), input, grad, grad_in, fg);
      // ReLU: input of layer l is relu(z) of layer l-1.
      for (std::size_t i = 0; i < grad_in.size(); ++i)
        if (!(input[i] > 0.0)) grad_in[i] = 0.0;
      grad.swap(grad_in);
    } else {
      kernels::conv2d_backward(shape, view.filters(l), input, grad, {}, fg);
    }
  }
  return value;
}

BackwardResult backward(const SubnetView& view, const Image& patch, const Image& target) {
  BackwardResult r;
  r.grads = Gradients::zeros_like(view.weights());
  r.loss = accumulate_backward(view, patch, target, r.grads);
  return r;
}

AdamState AdamState::for_weights(const SupernetWeights& weights) {
  AdamState s;
  s.m = Gradients::zeros_like(weights).layers;
  s.v = s.m;
  return s;
}

double train_step(SupernetWeights& weights, double width,
                  std::span<const TrainingPair* const> batch, AdamState& adam, double lr) {
  if (batch.empty()) throw InvalidArgument("train_step on an empty batch");
  for (const auto* pair : batch) {
    if (pair->moire.height() != batch[0]->moire.height() ||
        pair->moire.width() != batch[0]->moire.width())
      throw DimensionMismatch("train_step: batch pairs differ in size");
  }
  const SubnetView view(weights, width);
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<Gradients> per_sample(batch.size());
  std::vector<double> losses(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    per_sample[i] = Gradients::zeros_like(weights);
    losses[i] = accumulate_backward(view, batch[i]->moire, batch[i]->clean, per_sample[i]);
  }
  Gradients total = std::move(per_sample[0]);
  double mean_loss = losses[0];
  for (std::ptrdiff_t i = 1; i < n; ++i) {
    total.add(per_sample[i]);
    mean_loss += losses[i];
  }
  total.scale(1.0 / static_cast<double>(n));
  mean_loss /= static_cast<double>(n);

  ++adam.step;
  const double b1 = adam.beta1, b2 = adam.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
  auto update = [&](double& param, double& m, double& v, double g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param -= lr * m_hat / (std::sqrt(v_hat) + adam.epsilon);
  };
  for (std::size_t l = 0; l < weights.layers().size(); ++l) {
    LayerParams& p = weights.layers()[l];
    const LayerParams& g = total.layers[l];
    LayerParams& m = adam.m[l];
    LayerParams& v = adam.v[l];
    const LayerSlice& sl = view.layers()[l];
    const std::size_t row = static_cast<std::size_t>(sl.c_in) * p.ksize * p.ksize;
    for (int co = 0; co < sl.c_out; ++co) {
      const std::size_t base = co * p.filter_stride();
      for (std::size_t q = 0; q < row; ++q)
        update(p.kernel[base + q], m.kernel[base + q], v.kernel[base + q], g.kernel[base + q]);
      update(p.bias[co], m.bias[co], v.bias[co], g.bias[co]);
    }
  }
  return mean_loss;
}

double train_step(SupernetWeights& weights, double width, std::span<const TrainingPair> batch,
                  AdamState& adam, double lr) {
  std::vector<const TrainingPair*> ptrs;
  for (const auto& p : batch) ptrs.push_back(&p);
  return train_step(weights, width, std::span<const TrainingPair* const>(ptrs), adam, lr);
}

std::vector<LayerFlops> layer_flops(const SupernetSpec& spec, double width, int height,
                                    int width_px) {
  spec.validate();
  const int hidden = hidden_channels(spec.base_channels, width);
  const std::uint64_t px = static_cast<std::uint64_t>(height) * width_px;
  const std::uint64_t k2 = static_cast<std::uint64_t>(spec.kernel_size) * spec.kernel_size;
  std::vector<LayerFlops> out;
  for (int l = 0; l < spec.num_layers; ++l) {
    const std::uint64_t c_in = l == 0 ? 3 : hidden;
    const std::uint64_t c_out = l == spec.num_layers - 1 ? 3 : hidden;
    out.push_back({2 * px * c_in * c_out * k2, px * c_out});
  }
  return out;
}

std::uint64_t flops(const SupernetSpec& spec, double width, int height, int width_px) {
  std::uint64_t total = 0;
  for (const auto& l : layer_flops(spec, width, height, width_px)) total += l.multiply_add + l.bias;
  if (spec.residual) total += static_cast<std::uint64_t>(height) * width_px * 3;
  return total;
}

std::uint64_t param_count(const SupernetSpec& spec, double width) {
  spec.validate();
  const std::uint64_t hidden = hidden_channels(spec.base_channels, width);
  const std::uint64_t k2 = static_cast<std::uint64_t>(spec.kernel_size) * spec.kernel_size;
  std::uint64_t total = 0;
  for (int l = 0; l < spec.num_layers; ++l) {
    const std::uint64_t c_in = l == 0 ? 3 : hidden;
    const std::uint64_t c_out = l == spec.num_layers - 1 ? 3 : hidden;
    total += c_out * c_in * k2 + c_out;
  }
  return total;
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'D', 'A', 'W'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  bool done() const { return pos_ == bytes_.size(); }

private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw WeightsFormatError(WeightsFormatError::Kind::kTruncated,
                               "weights file truncated at byte " + std::to_string(bytes_.size()));
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> serialize_weights(const SupernetWeights& weights) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  const SupernetSpec& spec = weights.spec();
  put_u32(out, kWeightsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(spec.num_layers));
  put_u32(out, static_cast<std::uint32_t>(spec.base_channels));
  put_u32(out, static_cast<std::uint32_t>(spec.kernel_size));
  put_u32(out, spec.residual ? 1u : 0u);
  for (const auto& l : weights.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.c_out));
    put_u32(out, static_cast<std::uint32_t>(l.c_in));
    put_u32(out, static_cast<std::uint32_t>(l.ksize));
    for (double v : l.kernel) put_f64(out, v);
    for (double v : l.bias) put_f64(out, v);
  }
  return out;
}

SupernetWeights deserialize_weights(std::span<const std::uint8_t> bytes) {
  using Kind = WeightsFormatError::Kind;
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw WeightsFormatError(Kind::kFormat, "not a DDAW weights file (bad magic)");
  Reader in(bytes.subspan(4));
  const std::uint32_t version = in.u32();
  if (version != kWeightsFormatVersion)
    throw WeightsFormatError(Kind::kVersion, "unsupported weights format version " +
                                                 std::to_string(version));
  SupernetSpec spec;
  spec.num_layers = static_cast<int>(in.u32());
  spec.base_channels = static_cast<int>(in.u32());
  spec.kernel_size = static_cast<int>(in.u32());
  const std::uint32_t residual = in.u32();
  if (residual > 1) throw WeightsFormatError(Kind::kFormat, "bad residual flag");
  spec.residual = residual == 1;
  if (spec.num_layers < 2 || spec.num_layers > 4096 || spec.base_channels < 1 ||
      spec.base_channels > 65536 || spec.kernel_size < 1 || spec.kernel_size % 2 == 0 ||
      spec.kernel_size > 63)
    throw WeightsFormatError(Kind::kFormat, "implausible supernet spec in header");

  SupernetWeights weights(spec);
  for (int l = 0; l < spec.num_layers; ++l) {
    LayerParams& p = weights.layers()[l];
    const int c_out = static_cast<int>(in.u32());
    const int c_in = static_cast<int>(in.u32());
    const int k = static_cast<int>(in.u32());
    if (c_out != p.c_out || c_in != p.c_in || k != p.ksize)
      throw WeightsFormatError(Kind::kShape,
                               "layer " + std::to_string(l) + " shape " + std::to_string(c_out) +
                                   "x" + std::to_string(c_in) + "x" + std::to_string(k) +
                                   " does not match spec");
    for (double& v : p.kernel) v = in.f64();
    for (double& v : p.bias) v = in.f64();
  }
  if (!in.done()) throw WeightsFormatError(Kind::kFormat, "trailing bytes after last layer");
  return weights;
}

void save_weights(const SupernetWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(weights);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "write failed: " + path.string());
}

SupernetWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsFormatError(WeightsFormatError::Kind::kIo, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

} // namespace dda

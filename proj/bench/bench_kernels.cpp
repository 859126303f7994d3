// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels vs the production (tiled GEMM + OpenMP) kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "dda/conv.hpp"
#include "dda/moire_prior.hpp"
#include "dda/parallel.hpp"
#include "dda/supernet.hpp"

namespace {

using namespace dda;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Image random_image(int h, int w, std::uint64_t seed) {
  Image img(h, w);
  const auto v = random_vec(img.size(), seed);
  for (std::size_t i = 0; i < v.size(); ++i) img.data()[i] = 0.5 + 0.5 * v[i];
  return img;
}

// Arg: image side; 32 -> 32 channels, 3x3.
struct ConvFixture {
  kernels::ConvShape shape;
  std::vector<double> kernel, bias, input, output, grad_out, grad_in, grad_k, grad_b;
  explicit ConvFixture(int side) : shape{side, side, 32, 32, 3} {
    kernel = random_vec(shape.patch_len() * shape.c_out, 1);
    bias = random_vec(shape.c_out, 2);
    input = random_vec(shape.c_in * shape.pixels(), 3);
    grad_out = random_vec(shape.c_out * shape.pixels(), 4);
    output.resize(shape.c_out * shape.pixels());
    grad_in.resize(input.size());
    grad_k.resize(kernel.size());
    grad_b.resize(bias.size());
  }
  kernels::FilterBank bank() const { return {kernel.data(), shape.patch_len(), bias.data()}; }
  kernels::FilterGrad grad() { return {grad_k.data(), shape.patch_len(), grad_b.data()}; }
  double flops() const { return 2.0 * shape.pixels() * shape.patch_len() * shape.c_out; }
};

void BM_ConvForwardReference(benchmark::State& state) {
  ConvFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::conv2d_forward_reference(f.shape, f.bank(), f.input, f.output);
    benchmark::DoNotOptimize(f.output.data());
  }
  state.counters["FLOP/s"] = benchmark::Counter(f.flops(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvForward(benchmark::State& state) {
  ConvFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::conv2d_forward(f.shape, f.bank(), f.input, f.output);
    benchmark::DoNotOptimize(f.output.data());
  }
  state.counters["FLOP/s"] = benchmark::Counter(f.flops(), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ConvBackwardReference(benchmark::State& state) {
  ConvFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::conv2d_backward_reference(f.shape, f.bank(), f.input, f.grad_out, f.grad_in, f.grad());
    benchmark::DoNotOptimize(f.grad_in.data());
  }
}

void BM_ConvBackward(benchmark::State& state) {
  ConvFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    kernels::conv2d_backward(f.shape, f.bank(), f.input, f.grad_out, f.grad_in, f.grad());
    benchmark::DoNotOptimize(f.grad_in.data());
  }
}

void BM_HighpassSerial(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Plane lum = to_luminance(random_image(side, side, 5));
  for (auto _ : state) benchmark::DoNotOptimize(highpass_residual_serial(lum, PriorConfig{}));
}

void BM_Highpass(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Plane lum = to_luminance(random_image(side, side, 5));
  for (auto _ : state) benchmark::DoNotOptimize(highpass_residual(lum, PriorConfig{}));
}

void BM_ScoreGridSerial(benchmark::State& state) {
  const Image img = random_image(1024, 1024, 6);
  const PatchGrid g = split(img, 128, 128);
  for (auto _ : state) benchmark::DoNotOptimize(score_grid_serial(img, g, PriorConfig{}));
}

void BM_ScoreGrid(benchmark::State& state) {
  const Image img = random_image(1024, 1024, 6);
  const PatchGrid g = split(img, 128, 128);
  for (auto _ : state) benchmark::DoNotOptimize(score_grid(img, g, PriorConfig{}));
}

void BM_SupernetForwardReference(benchmark::State& state) {
  const SupernetWeights w = init_weights(SupernetSpec{}, 1);
  const Image x = random_image(64, 64, 7);
  const double width = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(forward_reference(SubnetView(w, width), x));
}

void BM_SupernetForward(benchmark::State& state) {
  const SupernetWeights w = init_weights(SupernetSpec{}, 1);
  const Image x = random_image(64, 64, 7);
  const double width = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(forward(SubnetView(w, width), x));
}

BENCHMARK(BM_ConvForwardReference)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward)->Arg(32)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackwardReference)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward)->Arg(32)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HighpassSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Highpass)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreGridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreGrid)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupernetForwardReference)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupernetForward)->Arg(25)->Arg(50)->Arg(75)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace

int main(int argc, char** argv) {
  set_thread_count(thread_count_from_env());
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

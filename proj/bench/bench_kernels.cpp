// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parallel kernels against the serial reference implementations.
//
//   bench_kernels --benchmark_filter=Gemm

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ridnet/kernels.hpp"
#include "ridnet/model.hpp"
#include "ridnet/ops.hpp"
#include "ridnet/parallel.hpp"

using namespace ridnet;
using kernels::Transpose;

namespace {

std::vector<float> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

// Shapes of the im2col products in a 64-channel layer on an 80x80 patch.
void gemm_args(benchmark::internal::Benchmark* b) {
  b->Args({64, 6400, 576})->Args({64, 6400, 64})->Args({4, 1, 64})->Args({128, 128, 128});
}

void BM_GemmParallel(benchmark::State& state) {
  const auto m = std::size_t(state.range(0)), n = std::size_t(state.range(1)), k = std::size_t(state.range(2));
  const auto a = random_vector(m * k, 1), b = random_vector(k * n, 2);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    kernels::gemm<float>(Transpose::no, Transpose::no, m, n, k, a.data(), k, b.data(), n, 0.0f, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] =
      benchmark::Counter(2.0 * double(m * n * k), benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmParallel)->Apply(gemm_args)->Unit(benchmark::kMicrosecond);

void BM_GemmReference(benchmark::State& state) {
  const auto m = std::size_t(state.range(0)), n = std::size_t(state.range(1)), k = std::size_t(state.range(2));
  const auto a = random_vector(m * k, 1), b = random_vector(k * n, 2);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    kernels::reference::gemm<float>(Transpose::no, Transpose::no, m, n, k, a.data(), k, b.data(), n, 0.0f, c.data(),
                                    n);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] =
      benchmark::Counter(2.0 * double(m * n * k), benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_GemmReference)->Apply(gemm_args)->Unit(benchmark::kMicrosecond);

// 3x3 conv, channels in/out, on a size x size map, dilation d.
void conv_args(benchmark::internal::Benchmark* b) { b->Args({16, 48, 1})->Args({16, 48, 2})->Args({64, 80, 2}); }

void BM_ConvParallel(benchmark::State& state) {
  const auto ch = std::size_t(state.range(0)), size = std::size_t(state.range(1));
  const int d = int(state.range(2));
  const Tensor<float> x({1, ch, size, size}, random_vector(ch * size * size, 3));
  const Tensor<float> w({ch, ch, 3, 3}, random_vector(ch * ch * 9, 4));
  const Tensor<float> bias({ch}, random_vector(ch, 5));
  NoGradGuard no_grad;
  for (auto _ : state) {
    auto y = conv2d(x, w, bias, d, d);
    benchmark::DoNotOptimize(y.data().data());
  }
}
BENCHMARK(BM_ConvParallel)->Apply(conv_args)->Unit(benchmark::kMillisecond);

void BM_ConvReference(benchmark::State& state) {
  const auto ch = std::size_t(state.range(0)), size = std::size_t(state.range(1));
  const auto d = std::size_t(state.range(2));
  const auto x = random_vector(ch * size * size, 3), w = random_vector(ch * ch * 9, 4), bias = random_vector(ch, 5);
  kernels::ConvGeometry g{ch, size, size, 3, d, d};
  std::vector<float> y(ch * g.col_cols());
  for (auto _ : state) {
    kernels::reference::conv2d<float>(x.data(), 1, g, w.data(), ch, bias.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_ConvReference)->Apply(conv_args)->Unit(benchmark::kMillisecond);

// One training step of the toy network: forward, l1 loss, backward.
void BM_ToyStep(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.num_eams = 2;
  cfg.channels = 16;
  cfg.attention_reduction = 4;
  auto net = RIDNet::initialized(cfg, 1);
  const Tensor<float> x({8, 1, 48, 48}, random_vector(8 * 48 * 48, 6));
  const Tensor<float> t({8, 1, 48, 48}, random_vector(8 * 48 * 48, 7));
  for (auto _ : state) {
    net.zero_grad();
    l1_loss(net.forward(x), t).backward();
  }
}
BENCHMARK(BM_ToyStep)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

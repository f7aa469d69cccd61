// Parallel kernels against the serial reference at the age model's layer sizes.
// Run with --benchmark_filter to pick a layer; thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tongueage/kernels.hpp"

namespace k = tongueage::kernels;

namespace {

std::vector<float> noise(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

// Second convolution of the age model: 63 x 412 x 8 -> 61 x 410 x 8.
k::ConvDims conv_dims(std::size_t batch) {
  k::ConvDims d;
  d.batch = batch;
  d.height = 63;
  d.width = 412;
  d.in_channels = 8;
  d.out_channels = 8;
  return d;
}

template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const auto d = conv_dims(static_cast<std::size_t>(state.range(0)));
  const auto in = noise(d.in_size(), 1), w = noise(d.weight_size(), 2), b = noise(d.out_channels, 3);
  std::vector<float> out(d.out_size());
  for (auto _ : state) {
    if constexpr (Parallel)
      k::conv2d_forward<float>(d, in, w, b, out);
    else
      k::reference::conv2d_forward<float>(d, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const auto d = conv_dims(static_cast<std::size_t>(state.range(0)));
  const auto in = noise(d.in_size(), 1), w = noise(d.weight_size(), 2), go = noise(d.out_size(), 3);
  std::vector<float> gi(d.in_size()), gw(d.weight_size()), gb(d.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::conv2d_backward<float>(d, in, w, go, gi, gw, gb);
    else
      k::reference::conv2d_backward<float>(d, in, w, go, gi, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Pool(benchmark::State& state) {
  k::PoolDims d;
  d.batch = static_cast<std::size_t>(state.range(0));
  d.height = 61;
  d.width = 410;
  d.channels = 8;
  const auto in = noise(d.in_size(), 4);
  std::vector<float> out(d.out_size()), gi(d.in_size());
  std::vector<std::size_t> arg(d.out_size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::maxpool2d_forward<float>(d, in, out, arg);
      k::maxpool2d_backward<float>(d, arg, out, gi);
    } else {
      k::reference::maxpool2d_forward<float>(d, in, out, arg);
      k::reference::maxpool2d_backward<float>(d, arg, out, gi);
    }
    benchmark::DoNotOptimize(gi.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// First dense layer: 5656 -> 512.
template <bool Parallel>
void BM_Dense(benchmark::State& state) {
  k::DenseDims d;
  d.batch = static_cast<std::size_t>(state.range(0));
  d.in_units = 5656;
  d.out_units = 512;
  const auto in = noise(d.batch * d.in_units, 5), w = noise(d.in_units * d.out_units, 6),
             b = noise(d.out_units, 7), go = noise(d.batch * d.out_units, 8);
  std::vector<float> out(d.batch * d.out_units), gi(d.batch * d.in_units), gw(w.size()), gb(d.out_units);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::dense_forward<float>(d, in, w, b, out);
      k::dense_backward<float>(d, in, w, go, gi, gw, gb);
    } else {
      k::reference::dense_forward<float>(d, in, w, b, out);
      k::reference::dense_backward<float>(d, in, w, go, gi, gw, gb);
    }
    benchmark::DoNotOptimize(gw.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/reference")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/reference")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/parallel")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Pool<false>)->Name("maxpool/reference")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Pool<true>)->Name("maxpool/parallel")->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dense<false>)->Name("dense/reference")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dense<true>)->Name("dense/parallel")->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

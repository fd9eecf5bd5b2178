#include <benchmark/benchmark.h>

#include "snnlab/network.hpp"
#include "snnlab/ops.hpp"
#include "snnlab/rng.hpp"

using namespace snnlab;

namespace {

// default-net shapes: the conv2 block dominates training time
void BM_Conv2dForward(benchmark::State& state) {
  RngStream rng(1, 0);
  const auto b = static_cast<std::size_t>(state.range(0));
  Tensor input = sample_gaussian(rng, {b, 8, 14, 14}, 0.0, 1.0);
  Tensor kernel = sample_gaussian(rng, {16, 8, 3, 3}, 0.0, 0.2);
  Tensor bias({16});
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d(input, kernel, bias, 1, 1));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(b));
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(64);

void BM_Conv2dBackward(benchmark::State& state) {
  RngStream rng(2, 0);
  const auto b = static_cast<std::size_t>(state.range(0));
  Tensor input = sample_gaussian(rng, {b, 8, 14, 14}, 0.0, 1.0);
  Tensor kernel = sample_gaussian(rng, {16, 8, 3, 3}, 0.0, 0.2);
  Tensor d_out = sample_gaussian(rng, {b, 16, 14, 14}, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d_backward(input, kernel, d_out, 1, 1));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(b));
}
BENCHMARK(BM_Conv2dBackward)->Arg(16)->Arg(64);

void BM_Dense(benchmark::State& state) {
  RngStream rng(3, 0);
  Tensor input = sample_gaussian(rng, {64, 784}, 0.0, 1.0);
  Tensor w = sample_gaussian(rng, {10, 784}, 0.0, 0.05);
  Tensor b({10});
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense(input, w, b));
  }
}
BENCHMARK(BM_Dense);

Network bench_net() {
  NeuronSpec neuron;
  SurrogateSpec surr;
  Network net = make_network(default_conv_spec(neuron, surr, 4, Encoder::kConstantCurrent));
  RngStream rng(4, 0);
  for (auto& p : net.params) {
    for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] = rng.next_gaussian(0.0, 0.2);
  }
  return net;
}

void BM_SpikingForward(benchmark::State& state) {
  Network net = bench_net();
  RngStream rng(5, 0);
  Tensor images({16, 1, 28, 28});
  for (std::size_t i = 0; i < images.size(); ++i) images[i] = (i % 256) / 255.0;
  for (auto _ : state) {
    RngStream r = rng;
    benchmark::DoNotOptimize(forward(net, images, ForwardMode::kSpiking, r));
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_SpikingForward);

void BM_ForwardBackward(benchmark::State& state) {
  Network net = bench_net();
  RngStream rng(6, 0);
  Tensor images({16, 1, 28, 28});
  for (std::size_t i = 0; i < images.size(); ++i) images[i] = (i % 256) / 255.0;
  for (auto _ : state) {
    RngStream r = rng;
    auto res = forward(net, images, ForwardMode::kSpiking, r);
    Tensor d_rates(res.rates.shape());
    d_rates.fill(0.01);
    benchmark::DoNotOptimize(backward(net, res.tape, d_rates));
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_ForwardBackward);

void BM_SampleGaussian(benchmark::State& state) {
  RngStream rng(7, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_gaussian(rng, {100000}, 0.0, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SampleGaussian);

}  // namespace

BENCHMARK_MAIN();

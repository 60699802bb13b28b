#include <benchmark/benchmark.h>

#include "tabletop/models.hpp"
#include "tabletop/network.hpp"
#include "tabletop/rng.hpp"

using namespace tabletop;

namespace {

Tensor random(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random({n, n}, 1), b = random({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_ConvForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Conv2d<float> conv(16, 32, 3, Padding::same);
  conv.weight().value = random({32, 16, 3, 3}, 3);
  const auto x = random({16, side, side}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, Mode::eval));
}
BENCHMARK(BM_ConvForward)->Arg(32)->Arg(64);

void BM_ConvBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Conv2d<float> conv(16, 32, 3, Padding::same);
  conv.weight().value = random({32, 16, 3, 3}, 3);
  const auto x = random({16, side, side}, 4);
  const auto g = random({32, side, side}, 5);
  conv.forward(x, Mode::train);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(g));
}
BENCHMARK(BM_ConvBackward)->Arg(32)->Arg(64);

void BM_AngleNetForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Network<float> net(angle_net(side, side), 1);
  const auto x = random({1, side, side}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, Mode::eval));
}
BENCHMARK(BM_AngleNetForward)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

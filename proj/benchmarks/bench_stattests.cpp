#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "vqrng/stattests.hpp"

using namespace vqrng;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n) {
  std::mt19937_64 rng(5);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
  return bits;
}

void BM_Battery(benchmark::State& state) {
  const auto bits = random_bits(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stattests::run_battery(bits));
}
BENCHMARK(BM_Battery)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_Spectral(benchmark::State& state) {
  const auto bits = random_bits(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stattests::spectral_test(bits));
}
BENCHMARK(BM_Spectral)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

}  // namespace

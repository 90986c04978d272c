#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "vqrng/extract.hpp"

using namespace vqrng;

namespace {

extract::ToeplitzSeed random_seed(int k, int l, std::uint64_t s) {
  std::mt19937_64 rng(s);
  std::vector<std::uint8_t> bytes((k + l - 1 + 7) / 8);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
  return extract::seed_from_entropy(bytes, k, l);
}

void BM_ExtractBlock(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int l = k / 2;
  const auto seed = random_seed(k, l, 1);
  const extract::ToeplitzExtractor engine(seed);
  std::mt19937_64 rng(2);
  std::vector<std::uint8_t> in(engine.input_bytes());
  for (auto& b : in) b = static_cast<std::uint8_t>(rng());
  std::vector<std::uint8_t> out(engine.output_bytes());
  for (auto _ : state) {
    engine.extract(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["out_bits/s"] = benchmark::Counter(static_cast<double>(state.iterations()) * l,
                                                    benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExtractBlock)->Arg(256)->Arg(1024)->Arg(4096);

void BM_ExtractStream(benchmark::State& state) {
  entropy::ExtractorParams p;  // k=1024, l=512, n=8
  const auto seed = random_seed(p.k, p.l, 3);
  std::mt19937_64 rng(4);
  std::vector<std::uint16_t> codes(static_cast<std::size_t>(state.range(0)));
  for (auto& c : codes) c = static_cast<std::uint16_t>(rng() & 0xff);
  std::size_t bits = 0;
  for (auto _ : state) {
    const auto out = extract::extract_stream(seed, codes, p);
    bits += out.bit_count;
    benchmark::DoNotOptimize(out.bytes.data());
  }
  state.counters["out_bits/s"] = benchmark::Counter(static_cast<double>(bits), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExtractStream)->Arg(1 << 16)->Arg(1 << 22)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

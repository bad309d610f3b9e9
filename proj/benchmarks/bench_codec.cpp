#include <random>

#include <benchmark/benchmark.h>

#include "binrec/codec.hpp"
#include "oracles.hpp"

namespace {

void BM_CompressDotDecimal(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const binrec::CodeText bin{binrec::testing::bits_to_string(
                                 binrec::testing::random_bits(rng, static_cast<std::size_t>(state.range(0)))),
                             binrec::CodeFormat::binary};
  for (auto _ : state) benchmark::DoNotOptimize(binrec::compress_dot_decimal(bin));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CompressDotDecimal)->Arg(32)->Arg(256);

void BM_DecompressDotDecimal(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto dotted = binrec::compress_dot_decimal(
      {binrec::testing::bits_to_string(binrec::testing::random_bits(rng, static_cast<std::size_t>(state.range(0)))),
       binrec::CodeFormat::binary});
  for (auto _ : state) benchmark::DoNotOptimize(binrec::decompress_dot_decimal(dotted));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DecompressDotDecimal)->Arg(32)->Arg(256);

}  // namespace

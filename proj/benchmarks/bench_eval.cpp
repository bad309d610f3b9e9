#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "binrec/eval.hpp"
#include "oracles.hpp"

namespace {

void BM_Auc(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t k = 0; k < n; ++k) {
    labels[k] = static_cast<int>(rng() % 2);
    scores[k] = normal(rng) + 0.5 * labels[k];
  }
  for (auto _ : state) benchmark::DoNotOptimize(binrec::auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(100000);

void BM_SignedDot(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = binrec::BinaryCode::from_bits(binrec::testing::random_bits(rng, d));
  const auto b = binrec::BinaryCode::from_bits(binrec::testing::random_bits(rng, d));
  for (auto _ : state) benchmark::DoNotOptimize(binrec::signed_dot(a, b));
}
BENCHMARK(BM_SignedDot)->Arg(32)->Arg(256);

void BM_BitAndScore(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto a = binrec::BinaryCode::from_bits(binrec::testing::random_bits(rng, 32));
  const auto b = binrec::BinaryCode::from_bits(binrec::testing::random_bits(rng, 32));
  for (auto _ : state) benchmark::DoNotOptimize(binrec::bitwise_and_score(a, b));
}
BENCHMARK(BM_BitAndScore);

}  // namespace

#include <benchmark/benchmark.h>

#include "binrec/collab.hpp"
#include "planted.hpp"

namespace {

// One pass over a 200 x 200 planted task at d = 32.
void BM_TrainEpoch(benchmark::State& state) {
  const auto task = binrec::testing::make_planted_task(200, 200, 32, 1);
  const auto [model, head] = binrec::init_model(200, 200, 32, 1);
  binrec::TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.max_epochs = 1;
  const auto kind = state.range(0) == 0 ? binrec::ScoringModel::binmf : binrec::ScoringModel::mf;
  for (auto _ : state) {
    benchmark::DoNotOptimize(binrec::train_model(kind, model, head, task.train, task.valid, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(task.train.size()));
  state.SetLabel(kind == binrec::ScoringModel::binmf ? "binmf" : "mf");
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

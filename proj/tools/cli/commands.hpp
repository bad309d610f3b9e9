#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binrec/eval.hpp"
#include "cli/run_config.hpp"

namespace binrec::cli {

struct IngestResult {
  std::filesystem::path split_dir;
  nlohmann::ordered_json manifest;
};

struct TrainOutput {
  std::filesystem::path checkpoint;
  std::filesystem::path sidecar;
  std::filesystem::path log;
  TrainingLog training_log;
};

struct EncodeResult {
  std::filesystem::path dump;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
};

struct CorpusResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::size_t> record_counts;
};

struct EvalResult {
  std::filesystem::path report_json;
  std::filesystem::path report_table;
  MetricsReport report;
};

// Each command validates the config, writes its outputs under config.out_dir
// together with run_config.<command>.json, and throws binrec::Error on failure.
IngestResult cmd_ingest(const RunConfig& config);
TrainOutput cmd_train(const RunConfig& config);
EncodeResult cmd_encode(const RunConfig& config);
CorpusResult cmd_corpus(const RunConfig& config);
EvalResult cmd_eval(const RunConfig& config);

}  // namespace binrec::cli

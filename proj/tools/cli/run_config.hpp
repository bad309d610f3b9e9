#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binrec/codec.hpp"
#include "binrec/collab.hpp"
#include "binrec/dataset.hpp"
#include "binrec/promptgen.hpp"

namespace CLI {
class App;
}

namespace binrec::cli {

// Every knob of the pipeline in one flat record. Field names double as the
// keys of the configuration file and (with '-' for '_') the CLI flags.
struct RunConfig {
  // ingest
  std::string interactions;
  std::string interactions_sep = "::";
  std::string interactions_columns = "0,1,2,3";
  bool skip_header = false;
  std::int64_t min_timestamp = 0;
  double label_threshold = 3.0;
  std::string split_ratios = "0.8,0.1,0.1";
  std::string catalog;
  std::string catalog_sep = "::";
  std::string catalog_columns = "0,1";

  // train
  std::string model = "binmf";
  std::size_t dim = 32;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  double temperature = 0.0;  // 0 selects sqrt(dim)
  std::string optimizer = "adam";
  double momentum = 0.9;
  double weight_decay = 0.0;

  // encode / corpus
  std::string code_format = "binary";
  std::string corpus_mode = "both";
  std::string partitions = "train,valid,test";
  std::size_t history_len = 10;
  std::string template_file;

  // eval
  std::string scorer = "binmf";
  std::string scores_file;
  bool dump_scores = false;
  std::size_t min_user = 3;
  std::size_t min_item = 3;

  // global
  std::string out_dir = "binrec_out";
  std::uint64_t seed = 42;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  InteractionSchema interaction_schema() const;
  CatalogSchema catalog_schema() const;
  SplitRatios ratios() const;
  TrainConfig train_config() const;
  std::vector<Partition> partition_list() const;
  std::vector<CorpusMode> corpus_modes() const;
  WarmColdThresholds thresholds() const;

  std::filesystem::path out() const { return out_dir; }
  std::filesystem::path split_dir() const { return out() / "split"; }
  std::filesystem::path model_dir() const { return out() / "model"; }
  std::filesystem::path code_dump_path(CodeFormat f) const;
  std::filesystem::path checkpoint_path(ScoringModel m) const;

  nlohmann::ordered_json to_json() const;
};

/// Registers one option per RunConfig field plus --config on `app`.
void add_options(CLI::App& app, RunConfig& config);

}  // namespace binrec::cli

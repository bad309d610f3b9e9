#include "cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <cmath>

#include "CLI11.hpp"
#include "binrec/error.hpp"
#include "binrec/eval.hpp"

namespace binrec::cli {

namespace {

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto part : split_fields(text, ",")) {
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    out.push_back(part);
  }
  return out;
}

std::vector<std::size_t> parse_indices(std::string_view key, std::string_view text, std::size_t expected) {
  const auto parts = split_list(text);
  if (parts.size() != expected) {
    throw ConfigError(std::string(key) + " must list " + std::to_string(expected) + " column indices");
  }
  std::vector<std::size_t> out;
  for (const auto p : parts) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (ec != std::errc() || ptr != p.data() + p.size()) {
      throw ConfigError(std::string(key) + ": '" + std::string(p) + "' is not a column index");
    }
    out.push_back(v);
  }
  return out;
}

// Config files may spell keys like the struct fields (learning_rate) or like
// the flags (learning-rate).
class FlagNameConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    for (auto& item : items) std::replace(item.name.begin(), item.name.end(), '_', '-');
    return items;
  }
};

}  // namespace

void RunConfig::validate() const {
  (void)interaction_schema();
  (void)catalog_schema();
  const auto r = ratios();
  if (!(r.train > 0 && r.valid > 0 && r.test > 0) || std::abs(r.train + r.valid + r.test - 1.0) > 1e-9) {
    throw ConfigError("split_ratios must be three positive fractions summing to 1");
  }
  if (!std::isfinite(label_threshold)) throw ConfigError("label_threshold must be finite");
  if (min_timestamp < 0) throw ConfigError("min_timestamp must be >= 0");
  if (dim == 0) throw ConfigError("dim must be positive");
  (void)parse_scoring_model(model);
  train_config().validate();
  (void)parse_code_format(code_format);
  (void)corpus_modes();
  (void)partition_list();
  if (scores_file.empty()) (void)parse_scorer(scorer);
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  if (interactions_sep.empty() || catalog_sep.empty()) throw ConfigError("separators must not be empty");
}

InteractionSchema RunConfig::interaction_schema() const {
  const auto cols = parse_indices("interactions_columns", interactions_columns, 4);
  InteractionSchema s;
  s.separator = interactions_sep;
  s.user_column = cols[0];
  s.item_column = cols[1];
  s.rating_column = cols[2];
  s.timestamp_column = cols[3];
  s.skip_header = skip_header;
  return s;
}

CatalogSchema RunConfig::catalog_schema() const {
  const auto cols = parse_indices("catalog_columns", catalog_columns, 2);
  CatalogSchema s;
  s.separator = catalog_sep;
  s.item_column = cols[0];
  s.title_column = cols[1];
  return s;
}

SplitRatios RunConfig::ratios() const {
  const auto parts = split_list(split_ratios);
  if (parts.size() != 3) throw ConfigError("split_ratios must list train,valid,test fractions");
  double v[3] = {};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [ptr, ec] = std::from_chars(parts[k].data(), parts[k].data() + parts[k].size(), v[k]);
    if (ec != std::errc() || ptr != parts[k].data() + parts[k].size()) {
      throw ConfigError("split_ratios: '" + std::string(parts[k]) + "' is not a number");
    }
  }
  return {v[0], v[1], v[2]};
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.learning_rate = learning_rate;
  cfg.batch_size = batch_size;
  cfg.max_epochs = max_epochs;
  cfg.early_stop_patience = patience;
  if (temperature < 0.0) throw ConfigError("temperature must be positive (or 0 for sqrt(dim))");
  if (temperature > 0.0) cfg.temperature = temperature;
  cfg.seed = seed;
  cfg.optimizer = parse_optimizer(optimizer);
  cfg.momentum = momentum;
  cfg.weight_decay = weight_decay;
  return cfg;
}

std::vector<Partition> RunConfig::partition_list() const {
  std::vector<Partition> out;
  for (const auto p : split_list(partitions)) out.push_back(parse_partition(p));
  if (out.empty()) throw ConfigError("partitions must name at least one partition");
  return out;
}

std::vector<CorpusMode> RunConfig::corpus_modes() const {
  if (corpus_mode == "both") return {CorpusMode::text_only, CorpusMode::full};
  return {parse_corpus_mode(corpus_mode)};
}

WarmColdThresholds RunConfig::thresholds() const { return {min_user, min_item}; }

std::filesystem::path RunConfig::code_dump_path(CodeFormat f) const {
  return out() / "codes" / ("codes." + std::string(to_string(f)) + ".tsv");
}

std::filesystem::path RunConfig::checkpoint_path(ScoringModel m) const {
  return model_dir() / (std::string(to_string(m)) + ".ckpt");
}

nlohmann::ordered_json RunConfig::to_json() const {
  return {
      {"interactions", interactions},
      {"interactions_sep", interactions_sep},
      {"interactions_columns", interactions_columns},
      {"skip_header", skip_header},
      {"min_timestamp", min_timestamp},
      {"label_threshold", label_threshold},
      {"split_ratios", split_ratios},
      {"catalog", catalog},
      {"catalog_sep", catalog_sep},
      {"catalog_columns", catalog_columns},
      {"model", model},
      {"dim", dim},
      {"learning_rate", learning_rate},
      {"batch_size", batch_size},
      {"max_epochs", max_epochs},
      {"patience", patience},
      {"temperature", temperature},
      {"optimizer", optimizer},
      {"momentum", momentum},
      {"weight_decay", weight_decay},
      {"code_format", code_format},
      {"corpus_mode", corpus_mode},
      {"partitions", partitions},
      {"history_len", history_len},
      {"template_file", template_file},
      {"scorer", scorer},
      {"scores_file", scores_file},
      {"dump_scores", dump_scores},
      {"min_user", min_user},
      {"min_item", min_item},
      {"out_dir", out_dir},
      {"seed", seed},
  };
}

void add_options(CLI::App& app, RunConfig& c) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.config_formatter(std::make_shared<FlagNameConfig>());
  app.set_config("--config", "", "Flat key = value configuration file (CLI flags take precedence)");

  auto* data = "Data";
  app.add_option("--interactions", c.interactions, "Delimited interaction file (user, item, rating, timestamp)")
      ->group(data);
  app.add_option("--interactions-sep", c.interactions_sep, "Interaction field separator")->group(data);
  app.add_option("--interactions-columns", c.interactions_columns, "Column indices of user,item,rating,timestamp")
      ->group(data);
  app.add_flag("--skip-header", c.skip_header, "Skip the first line of the interaction file")->group(data);
  app.add_option("--min-timestamp", c.min_timestamp, "Drop interactions older than this epoch second")->group(data);
  app.add_option("--label-threshold", c.label_threshold, "label = 1 iff rating > threshold")->group(data);
  app.add_option("--split-ratios", c.split_ratios, "Chronological train,valid,test fractions")->group(data);
  app.add_option("--catalog", c.catalog, "Delimited item catalog (item, title)")->group(data);
  app.add_option("--catalog-sep", c.catalog_sep, "Catalog field separator")->group(data);
  app.add_option("--catalog-columns", c.catalog_columns, "Column indices of item,title")->group(data);

  auto* train = "Training";
  app.add_option("--model", c.model, "binmf or mf")->group(train);
  app.add_option("--dim", c.dim, "Embedding / code width")->group(train);
  app.add_option("--learning-rate", c.learning_rate)->group(train);
  app.add_option("--batch-size", c.batch_size)->group(train);
  app.add_option("--max-epochs", c.max_epochs)->group(train);
  app.add_option("--patience", c.patience, "Early-stopping patience in epochs")->group(train);
  app.add_option("--temperature", c.temperature, "BinMF score temperature (0 = sqrt(dim))")->group(train);
  app.add_option("--optimizer", c.optimizer, "adam or momentum")->group(train);
  app.add_option("--momentum", c.momentum)->group(train);
  app.add_option("--weight-decay", c.weight_decay)->group(train);

  auto* corpus = "Codes and corpus";
  app.add_option("--code-format", c.code_format, "binary or dot_decimal")->group(corpus);
  app.add_option("--corpus-mode", c.corpus_mode, "text_only, full or both")->group(corpus);
  app.add_option("--partitions", c.partitions, "Comma-separated partitions to render")->group(corpus);
  app.add_option("--history-len", c.history_len, "Maximum number of history titles")->group(corpus);
  app.add_option("--template-file", c.template_file, "JSON file with 'full' and 'text_only' templates")
      ->group(corpus);

  auto* eval = "Evaluation";
  app.add_option("--scorer", c.scorer, "mf, binmf or bit_and")->group(eval);
  app.add_option("--scores-file", c.scores_file, "Evaluate an external per-example score dump instead")
      ->group(eval);
  app.add_flag("--dump-scores", c.dump_scores, "Also write the per-example score dump")->group(eval);
  app.add_option("--min-user", c.min_user, "Warm threshold on user training interactions")->group(eval);
  app.add_option("--min-item", c.min_item, "Warm threshold on item training interactions")->group(eval);

  app.add_option("--out-dir", c.out_dir, "Output directory");
  app.add_option("--seed", c.seed, "Random seed");
}

}  // namespace binrec::cli

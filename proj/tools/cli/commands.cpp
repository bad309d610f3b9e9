#include "cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binrec/checkpoint.hpp"
#include "binrec/content_hash.hpp"
#include "binrec/error.hpp"

namespace binrec::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void persist_config(const RunConfig& config, std::string_view command) {
  write_json(config.out() / ("run_config." + std::string(command) + ".json"), config.to_json());
}

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::exists(path)) throw DataError(std::string(what) + " not found: " + path.string());
}

SplitSet load_split(const RunConfig& config) {
  require_file(config.split_dir() / "manifest.json", "split manifest (run ingest first)");
  return read_split(config.split_dir());
}

Checkpoint load_matching_checkpoint(const RunConfig& config, ScoringModel kind, const SplitSet& split) {
  const auto path = config.checkpoint_path(kind);
  require_file(path, "checkpoint (run train first)");
  auto ckpt = load_checkpoint(path);
  if (ckpt.model.n_users() != split.users.size() || ckpt.model.n_items() != split.items.size()) {
    throw DataError(path.string() + ": checkpoint tables do not match the split's user/item counts");
  }
  return ckpt;
}

// Codes from a dump, re-indexed to the split's dense indices.
CodeBook codebook_from_dump(const CodeDump& dump, const SplitSet& split) {
  const auto table = CodeTable::from_dump(dump);
  CodeBook book;
  const auto fill = [](const auto& ids, const auto& codes, EntityKind kind, std::vector<BinaryCode>& out) {
    for (const auto& id : ids) {
      const auto it = codes.find(id);
      if (it == codes.end()) throw DataError("code dump has no code for " + std::string(to_string(kind)) + " " + id);
      out.push_back(parse_code(it->second));
    }
  };
  fill(split.users.ids(), table.users, EntityKind::user, book.users);
  fill(split.items.ids(), table.items, EntityKind::item, book.items);
  return book;
}

}  // namespace

IngestResult cmd_ingest(const RunConfig& config) {
  config.validate();
  if (config.interactions.empty()) throw ConfigError("ingest needs --interactions");
  const fs::path source = config.interactions;
  require_file(source, "interaction file");

  const auto raw = ingest_interactions(source, config.interaction_schema());
  std::vector<Interaction> kept;
  kept.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.timestamp >= config.min_timestamp) kept.push_back(r);
  }
  const auto labeled = binarize_labels(kept, config.label_threshold);
  const auto split = chronological_split(labeled, config.ratios());

  if (!config.catalog.empty()) {
    require_file(config.catalog, "catalog file");
  }

  nlohmann::ordered_json provenance;
  provenance["interactions"] = config.interactions;
  provenance["sha256"] = sha256_file_hex(source);
  provenance["rows_read"] = raw.size();
  provenance["rows_kept"] = kept.size();
  provenance["min_timestamp"] = config.min_timestamp;
  provenance["label_threshold"] = config.label_threshold;
  const auto r = config.ratios();
  provenance["ratios"] = {{"train", r.train}, {"valid", r.valid}, {"test", r.test}};

  IngestResult result;
  result.split_dir = config.split_dir();
  result.manifest = write_split(result.split_dir, split, provenance);
  persist_config(config, "ingest");
  return result;
}

TrainOutput cmd_train(const RunConfig& config) {
  config.validate();
  const auto kind = parse_scoring_model(config.model);
  const auto split = load_split(config);
  const auto train = index_rows(split, Partition::train);
  const auto valid = index_rows(split, Partition::valid);
  const auto cfg = config.train_config();

  auto [model, head] = init_model(split.users.size(), split.items.size(), config.dim, config.seed);
  const auto started = std::chrono::steady_clock::now();
  auto trained = train_model(kind, std::move(model), std::move(head), train, valid, cfg);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  TrainOutput out;
  out.checkpoint = config.checkpoint_path(kind);
  out.sidecar = config.model_dir() / (std::string(to_string(kind)) + ".json");
  out.log = config.model_dir() / (std::string(to_string(kind)) + ".log.tsv");
  out.training_log = trained.log;

  ensure_dir(config.model_dir());
  Checkpoint ckpt{std::move(trained.model), std::move(trained.head), cfg.resolved_temperature(config.dim)};
  save_checkpoint(out.checkpoint, ckpt);

  // Metrics for the sidecar come from the parameters exactly as stored.
  const auto stored = load_checkpoint(out.checkpoint);
  std::optional<double> valid_auc;
  try {
    std::vector<double> scores;
    std::vector<int> labels;
    const auto codes = kind == ScoringModel::binmf ? encode_all(stored.model, stored.head) : CodeBook{};
    for (const auto& ex : valid) {
      scores.push_back(kind == ScoringModel::binmf
                           ? static_cast<double>(signed_dot(codes.users[ex.user], codes.items[ex.item]))
                           : embed(stored.model, ex.user, EntityKind::user)
                                 .dot(embed(stored.model, ex.item, EntityKind::item)));
      labels.push_back(ex.label);
    }
    valid_auc = auc(scores, labels);
  } catch (const UndefinedMetricError&) {
  }

  nlohmann::ordered_json sidecar;
  sidecar["model"] = to_string(kind);
  sidecar["checkpoint"] = out.checkpoint.filename().string();
  sidecar["n_users"] = split.users.size();
  sidecar["n_items"] = split.items.size();
  sidecar["dim"] = config.dim;
  sidecar["train_config"] = {
      {"learning_rate", cfg.learning_rate},
      {"batch_size", cfg.batch_size},
      {"max_epochs", cfg.max_epochs},
      {"early_stop_patience", cfg.early_stop_patience},
      {"temperature", cfg.resolved_temperature(config.dim)},
      {"seed", cfg.seed},
      {"optimizer", to_string(cfg.optimizer)},
      {"momentum", cfg.momentum},
      {"weight_decay", cfg.weight_decay},
  };
  sidecar["metrics"] = {
      {"initial_train_loss", trained.log.initial_loss},
      {"epochs_run", trained.log.epochs.size()},
      {"best_epoch", trained.log.best_epoch},
      {"best_valid_auc", trained.log.best_valid_auc ? nlohmann::ordered_json(*trained.log.best_valid_auc)
                                                    : nlohmann::ordered_json(nullptr)},
      {"stored_valid_auc", valid_auc ? nlohmann::ordered_json(*valid_auc) : nlohmann::ordered_json(nullptr)},
  };
  write_json(out.sidecar, sidecar);

  auto log = open_out(out.log);
  log << "# elapsed_seconds=" << std::fixed << std::setprecision(3) << elapsed << '\n';
  log << "epoch\ttrain_loss\tvalid_auc\n" << std::setprecision(6);
  for (const auto& e : trained.log.epochs) log << e.epoch << '\t' << e.train_loss << '\t' << e.valid_auc << '\n';

  persist_config(config, "train");
  return out;
}

EncodeResult cmd_encode(const RunConfig& config) {
  config.validate();
  const auto format = parse_code_format(config.code_format);
  const auto split = load_split(config);
  const auto ckpt = load_matching_checkpoint(config, ScoringModel::binmf, split);
  const auto d = ckpt.model.dim();
  if (format == CodeFormat::dot_decimal && d % 8 != 0) {
    throw ConfigError("dot_decimal codes need a width divisible by 8; checkpoint has d=" + std::to_string(d));
  }

  const auto codes = encode_all(ckpt.model, ckpt.head);
  CodeDump dump;
  dump.dim = d;
  dump.format = format;
  for (std::size_t u = 0; u < codes.users.size(); ++u) {
    dump.entries.push_back({EntityKind::user, split.users.id(static_cast<std::uint32_t>(u)),
                            render_code(codes.users[u], format)});
  }
  for (std::size_t i = 0; i < codes.items.size(); ++i) {
    dump.entries.push_back({EntityKind::item, split.items.id(static_cast<std::uint32_t>(i)),
                            render_code(codes.items[i], format)});
  }

  EncodeResult result;
  result.dump = config.code_dump_path(format);
  result.n_users = codes.users.size();
  result.n_items = codes.items.size();
  auto out = open_out(result.dump);
  write_code_dump(out, dump);
  persist_config(config, "encode");
  return result;
}

CorpusResult cmd_corpus(const RunConfig& config) {
  config.validate();
  if (config.catalog.empty()) throw ConfigError("corpus needs --catalog");
  const auto split = load_split(config);
  require_file(config.catalog, "catalog file");
  const auto catalog = load_item_catalog(config.catalog, config.catalog_schema());
  const auto tmpl =
      config.template_file.empty() ? PromptTemplate::standard() : PromptTemplate::from_json_file(config.template_file);
  const auto modes = config.corpus_modes();

  std::optional<CodeTable> codes;
  if (std::find(modes.begin(), modes.end(), CorpusMode::full) != modes.end()) {
    const auto format = parse_code_format(config.code_format);
    const auto path = config.code_dump_path(format);
    require_file(path, "code dump (run encode first)");
    codes = CodeTable::from_dump(read_code_dump(path));
  }

  CorpusResult result;
  for (const auto partition : config.partition_list()) {
    for (const auto mode : modes) {
      CorpusOptions options;
      options.mode = mode;
      options.history_len = config.history_len;
      options.thresholds = config.thresholds();
      const auto records = build_corpus(split, partition, catalog, codes ? &*codes : nullptr, tmpl, options);
      const auto path =
          config.out() / "corpus" / (std::string(to_string(partition)) + "." + std::string(to_string(mode)) + ".jsonl");
      auto out = open_out(path);
      write_corpus(out, records);
      result.files.push_back(path);
      result.record_counts.push_back(records.size());
    }
  }
  persist_config(config, "corpus");
  return result;
}

EvalResult cmd_eval(const RunConfig& config) {
  config.validate();
  EvalResult result;
  std::vector<ScoredExample> examples;
  std::string name;

  if (!config.scores_file.empty()) {
    require_file(config.scores_file, "score dump");
    examples = read_score_dump(config.scores_file);
    name = "external";
  } else {
    const auto kind = parse_scorer(config.scorer);
    name = std::string(to_string(kind));
    const auto split = load_split(config);
    const auto tags = partition_warm_cold(split, config.thresholds());
    switch (kind) {
      case ScorerKind::mf: {
        const auto ckpt = load_matching_checkpoint(config, ScoringModel::mf, split);
        examples = score_test(make_mf_scorer(ckpt.model), split, tags);
        break;
      }
      case ScorerKind::binmf: {
        const auto ckpt = load_matching_checkpoint(config, ScoringModel::binmf, split);
        const auto codes = encode_all(ckpt.model, ckpt.head);
        examples = score_test(make_binmf_scorer(codes, ckpt.temperature), split, tags);
        break;
      }
      case ScorerKind::bit_and: {
        const auto format = parse_code_format(config.code_format);
        const auto path = config.code_dump_path(format);
        require_file(path, "code dump (run encode first)");
        const auto codes = codebook_from_dump(read_code_dump(path), split);
        examples = score_test(make_bit_and_scorer(codes), split, tags);
        break;
      }
    }
  }

  result.report = summarize(name, examples);
  const auto dir = config.out() / "eval";
  result.report_json = dir / (name + ".report.json");
  result.report_table = dir / (name + ".report.txt");
  write_json(result.report_json, to_json(result.report));
  {
    auto out = open_out(result.report_table);
    out << to_table(result.report);
  }
  if (config.dump_scores) {
    auto out = open_out(dir / (name + ".scores.jsonl"));
    write_score_dump(out, examples);
  }
  persist_config(config, "eval");
  return result;
}

}  // namespace binrec::cli

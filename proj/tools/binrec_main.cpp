// binrec: ingest -> train -> encode -> corpus -> eval.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.

#include <iostream>

#include "CLI11.hpp"
#include "binrec/error.hpp"
#include "cli/commands.hpp"

namespace {

void print_summary(const binrec::cli::EvalResult& r) { std::cout << binrec::to_table(r.report); }

}  // namespace

int main(int argc, char** argv) {
  using namespace binrec::cli;

  CLI::App app{"Binary collaborative codes for LLM recommendation prompts"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  add_options(app, config);

  auto* ingest = app.add_subcommand("ingest", "Parse, label and chronologically split an interaction log");
  auto* train = app.add_subcommand("train", "Train the BinMF (or MF) collaborative model");
  auto* encode = app.add_subcommand("encode", "Write user/item codes in binary or dot-decimal form");
  auto* corpus = app.add_subcommand("corpus", "Render instruction-tuning prompt corpora");
  auto* eval = app.add_subcommand("eval", "Compute AUC/UAUC on the test partition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (ingest->parsed()) {
      const auto r = cmd_ingest(config);
      std::cout << "split written to " << r.split_dir.string() << '\n';
      for (const auto& p : r.manifest["partitions"]) {
        std::cout << "  " << p["name"].get<std::string>() << ": " << p["rows"] << " rows\n";
      }
      std::cout << "  users: " << r.manifest["n_users"] << ", items: " << r.manifest["n_items"] << '\n';
    } else if (train->parsed()) {
      const auto r = cmd_train(config);
      std::cout << "checkpoint: " << r.checkpoint.string() << " (" << r.training_log.epochs.size()
                << " epochs, best epoch " << r.training_log.best_epoch << ")\n";
    } else if (encode->parsed()) {
      const auto r = cmd_encode(config);
      std::cout << "codes: " << r.dump.string() << " (" << r.n_users << " users, " << r.n_items << " items)\n";
    } else if (corpus->parsed()) {
      const auto r = cmd_corpus(config);
      for (std::size_t k = 0; k < r.files.size(); ++k) {
        std::cout << r.files[k].string() << ": " << r.record_counts[k] << " records\n";
      }
    } else if (eval->parsed()) {
      print_summary(cmd_eval(config));
    }
  } catch (const binrec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

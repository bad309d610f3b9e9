// Drives the binrec executable end to end on a 100-row toy log.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "binrec/codec.hpp"
#include "binrec/eval.hpp"
#include "binrec/promptgen.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using binrec::testing::read_text;
using binrec::testing::TempDir;
using binrec::testing::write_text;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + BINREC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Toy {
  TempDir dir;
  fs::path ratings = dir / "ratings.dat";
  fs::path movies = dir / "movies.dat";
  fs::path out = dir / "out";
  fs::path log = dir / "log.txt";

  Toy() {
    std::mt19937_64 rng(2024);
    std::ostringstream r;
    for (int k = 0; k < 100; ++k) {
      const int user = 1 + static_cast<int>(rng() % 8);
      const int item = 100 + static_cast<int>(rng() % 15);
      // Alternate high and low ratings so every partition sees both labels.
      const int rating = (k % 2 == 0) ? 4 + static_cast<int>(rng() % 2) : 1 + static_cast<int>(rng() % 3);
      r << user << "::" << item << "::" << rating << "::" << (1000 + k) << "\n";
    }
    write_text(ratings, r.str());
    std::ostringstream m;
    for (int item = 100; item < 115; ++item) m << item << "::Movie " << item << " (1999)::Drama\n";
    write_text(movies, m.str());
  }

  std::string common() const {
    return "--interactions \"" + ratings.string() + "\" --catalog \"" + movies.string() + "\" --out-dir \"" +
           out.string() + "\" --dim 16 --max-epochs 5 --learning-rate 0.01 --batch-size 16";
  }

  int cli(const std::string& sub, const std::string& extra = "") const {
    return run(sub + " " + common() + " " + extra, log);
  }
};

}  // namespace

TEST_CASE("full pipeline") {
  Toy t;
  INFO("last binrec output: " << read_text(t.log));
  REQUIRE(t.cli("ingest") == 0);
  const auto manifest = nlohmann::json::parse(read_text(t.out / "split" / "manifest.json"));
  CHECK(manifest["partitions"][0]["rows"] == 80);
  CHECK(manifest["partitions"][1]["rows"] == 10);
  CHECK(manifest["partitions"][2]["rows"] == 10);
  CHECK(fs::exists(t.out / "run_config.ingest.json"));

  // Re-ingesting the same file is byte-identical.
  const auto before = read_text(t.out / "split" / "manifest.json");
  const auto train_before = read_text(t.out / "split" / "train.tsv");
  REQUIRE(t.cli("ingest") == 0);
  CHECK(read_text(t.out / "split" / "manifest.json") == before);
  CHECK(read_text(t.out / "split" / "train.tsv") == train_before);

  REQUIRE(t.cli("train") == 0);
  CHECK(fs::exists(t.out / "model" / "binmf.ckpt"));
  const auto sidecar = nlohmann::json::parse(read_text(t.out / "model" / "binmf.json"));
  CHECK(sidecar.contains("train_config"));
  REQUIRE(t.cli("train", "--model mf --max-epochs 1") == 0);
  const auto mf_log = read_text(t.out / "model" / "mf.log.tsv");
  CHECK(std::count(mf_log.begin(), mf_log.end(), '\n') == 3);  // comment, header, one epoch
  CHECK(fs::exists(t.out / "model" / "mf.ckpt"));

  REQUIRE(t.cli("encode", "--code-format dot_decimal") == 0);
  const auto dump = binrec::read_code_dump(t.out / "codes" / "codes.dot_decimal.tsv");
  CHECK(dump.dim == 16);
  for (const auto& e : dump.entries) CHECK(binrec::parse_code(e.code).size() == 16);
  REQUIRE(t.cli("encode") == 0);

  REQUIRE(t.cli("corpus", "--code-format dot_decimal") == 0);
  for (const char* part : {"train", "valid", "test"}) {
    CAPTURE(part);
    const auto text_only = t.out / "corpus" / (std::string(part) + ".text_only.jsonl");
    const auto full = t.out / "corpus" / (std::string(part) + ".full.jsonl");
    REQUIRE(fs::exists(text_only));
    REQUIRE(fs::exists(full));
    const auto a = binrec::read_corpus(text_only);
    const auto b = binrec::read_corpus(full);
    CHECK(a.size() == b.size());
    for (const auto& r : a) CHECK_FALSE(binrec::contains_code_text(r.prompt));
    for (const auto& r : b) CHECK(r.prompt.find("with the feature ") != std::string::npos);
  }
  CHECK(binrec::read_corpus(t.out / "corpus" / "train.full.jsonl").size() == 80);

  for (const char* scorer : {"binmf", "mf", "bit_and"}) {
    CAPTURE(scorer);
    REQUIRE(t.cli("eval", std::string("--dump-scores --scorer ") + scorer) == 0);
    const auto report = nlohmann::json::parse(read_text(t.out / "eval" / (std::string(scorer) + ".report.json")));
    CHECK(report["segments"].size() == 3);
  }
  const auto scores = binrec::read_score_dump(t.out / "eval" / "binmf.scores.jsonl");
  CHECK(scores.size() == 10);

  // An externally produced dump in the same format evaluates too.
  REQUIRE(t.cli("eval", "--scores-file \"" + (t.out / "eval" / "binmf.scores.jsonl").string() + "\"") == 0);
  const auto ext = nlohmann::json::parse(read_text(t.out / "eval" / "external.report.json"));
  const auto own = nlohmann::json::parse(read_text(t.out / "eval" / "binmf.report.json"));
  CHECK(ext["segments"] == own["segments"]);
}

TEST_CASE("config file drives a run") {
  Toy t;
  INFO("last binrec output: " << read_text(t.log));
  write_text(t.dir / "run.toml", "interactions = \"" + t.ratings.generic_string() + "\"\nout_dir = \"" +
                                     t.out.generic_string() + "\"\nsplit_ratios = \"0.6,0.2,0.2\"\n");
  REQUIRE(run("ingest --config \"" + (t.dir / "run.toml").string() + "\"", t.log) == 0);
  const auto manifest = nlohmann::json::parse(read_text(t.out / "split" / "manifest.json"));
  CHECK(manifest["partitions"][0]["rows"] == 60);
  const auto recorded = nlohmann::json::parse(read_text(t.out / "run_config.ingest.json"));
  CHECK(recorded["split_ratios"] == "0.6,0.2,0.2");
}

TEST_CASE("error exit codes") {
  Toy t;
  INFO("last binrec output: " << read_text(t.log));
  CHECK(run("", t.log) == 1);
  CHECK(run("frobnicate", t.log) == 1);
  CHECK(t.cli("ingest", "--split-ratios 0.5,0.5,0.5") == 1);
  CHECK(run("ingest --interactions \"" + (t.dir / "missing.dat").string() + "\" --out-dir \"" + t.out.string() +
                "\"",
            t.log) == 2);

  write_text(t.dir / "broken.dat", "1::2::five::100\n");
  CHECK(run("ingest --interactions \"" + (t.dir / "broken.dat").string() + "\" --out-dir \"" + t.out.string() + "\"",
            t.log) == 2);
  CHECK(read_text(t.log).find(":1") != std::string::npos);

  REQUIRE(t.cli("ingest") == 0);
  CHECK(t.cli("eval", "--scorer cosine") == 1);
  CHECK(t.cli("eval") == 2);  // no checkpoint yet

  REQUIRE(t.cli("train", "--dim 12") == 0);
  CHECK(t.cli("encode", "--dim 12 --code-format dot_decimal") == 1);
  CHECK(read_text(t.log).find("divisible by 8") != std::string::npos);
  CHECK(t.cli("encode", "--dim 12") == 0);

  auto text = read_text(t.out / "split" / "test.tsv");
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  write_text(t.out / "split" / "test.tsv", text);
  CHECK(t.cli("train") == 2);
  CHECK(read_text(t.log).find("test.tsv") != std::string::npos);
}

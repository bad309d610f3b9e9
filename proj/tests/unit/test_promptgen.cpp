#include <random>
#include <sstream>

#include "binrec/codec.hpp"
#include "binrec/error.hpp"
#include "binrec/promptgen.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace binrec;

namespace {

// The question/answer template as written out by hand, with a literal line feed.
const std::string kGoldenFull =
    "#Question: A user has given high ratings to the following books: <ItemTitleList>. Additionally, we have "
    "information about the user's preferences encoded in the feature <UserID>. Using all available information, "
    "make a prediction about whether the user would enjoy the book titled <TargetItemTitle> with the feature "
    "<TargetItemID>? Answer with \"Yes\" or \"No\". \n#Answer:";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

LabeledInteraction row(std::string u, std::string i, std::int64_t ts, int label) {
  LabeledInteraction r;
  r.user_id = std::move(u);
  r.item_id = std::move(i);
  r.rating = label ? 5 : 1;
  r.timestamp = ts;
  r.label = label;
  return r;
}

CodeText dd(std::string s) { return {std::move(s), CodeFormat::dot_decimal}; }

}  // namespace

TEST_CASE("sentinel fields reproduce the template byte for byte") {
  PromptFields f;
  f.history_titles = {"@@H@@"};
  f.target_title = "@@T@@";
  f.user_code = CodeText{"@@U@@", CodeFormat::binary};
  f.item_code = CodeText{"@@I@@", CodeFormat::binary};
  const auto out = render_prompt(PromptTemplate::standard(), f, CorpusMode::full);
  auto expected = replace_all(kGoldenFull, "<ItemTitleList>", "\"@@H@@\"");
  expected = replace_all(expected, "<UserID>", "@@U@@");
  expected = replace_all(expected, "<TargetItemTitle>", "@@T@@");
  expected = replace_all(expected, "<TargetItemID>", "@@I@@");
  CHECK(out == expected);
  CHECK(PromptTemplate::standard().text(CorpusMode::full) == kGoldenFull);
}

TEST_CASE("full prompt with dot-decimal codes") {
  PromptFields f;
  f.history_titles = {"Dune", "Emma"};
  f.target_title = "Ulysses";
  f.user_code = dd("172.16.254.1");
  f.item_code = dd("10.0.0.255");
  const auto out = render_prompt(PromptTemplate::standard(), f, CorpusMode::full);
  CHECK(out.rfind("#Question: A user has given high ratings to the following books: \"Dune\", \"Emma\". ", 0) == 0);
  CHECK(out.find("encoded in the feature 172.16.254.1.") != std::string::npos);
  CHECK(out.find("titled Ulysses with the feature 10.0.0.255?") != std::string::npos);
  CHECK(out.ends_with("\n#Answer:"));
}

TEST_CASE("text-only prompt drops the ID sentences") {
  PromptFields f;
  f.target_title = "Ulysses";
  const auto out = render_prompt(PromptTemplate::standard(), f, CorpusMode::text_only);
  CHECK(out ==
        "#Question: A user has given high ratings to the following books: None. Using all available information, "
        "make a prediction about whether the user would enjoy the book titled Ulysses? Answer with \"Yes\" or "
        "\"No\". \n#Answer:");
  CHECK_FALSE(contains_code_text(out));
}

TEST_CASE("history keeps the newest titles with the most recent last") {
  PromptFields f;
  for (int k = 1; k <= 5; ++k) f.history_titles.push_back("T" + std::to_string(k));
  f.target_title = "X";
  const auto out = render_prompt(PromptTemplate::standard(), f, CorpusMode::text_only, 3);
  CHECK(out.find("books: \"T3\", \"T4\", \"T5\".") != std::string::npos);
  CHECK(out.find("T2") == std::string::npos);
}

TEST_CASE("full mode needs both codes") {
  PromptFields f;
  f.target_title = "X";
  f.user_code = dd("1.2");
  CHECK_THROWS_AS(render_prompt(PromptTemplate::standard(), f, CorpusMode::full), DataError);
}

TEST_CASE("template validation") {
  CHECK_THROWS_AS(PromptTemplate("<ItemTitleList> <TargetItemTitle>", "<ItemTitleList> <TargetItemTitle>"),
                  ConfigError);
  CHECK_THROWS_AS(PromptTemplate(kGoldenFull, "<ItemTitleList> <TargetItemTitle> <UserID>"), ConfigError);
  CHECK_THROWS_AS(PromptTemplate(kGoldenFull + " <UserID>", "<ItemTitleList> <TargetItemTitle>"), ConfigError);

  const PromptTemplate odd(kGoldenFull + " <Extra>", "<ItemTitleList> <TargetItemTitle>");
  PromptFields f;
  f.target_title = "X";
  f.user_code = dd("1");
  f.item_code = dd("2");
  CHECK_THROWS_AS(render_prompt(odd, f, CorpusMode::full), ConfigError);
  CHECK_NOTHROW(render_prompt(odd, f, CorpusMode::text_only));
}

TEST_CASE("substituted values are not re-expanded") {
  PromptFields f;
  f.history_titles = {"<TargetItemTitle>"};
  f.target_title = "Real";
  const auto out = render_prompt(PromptTemplate::standard(), f, CorpusMode::text_only);
  CHECK(out.find("books: \"<TargetItemTitle>\".") != std::string::npos);
}

TEST_CASE("template file") {
  binrec::testing::TempDir dir;
  binrec::testing::write_text(dir / "t.json",
                              R"({"full": "<ItemTitleList>|<UserID>|<TargetItemTitle>|<TargetItemID>",)"
                              R"( "text_only": "<ItemTitleList>|<TargetItemTitle>"})");
  const auto t = PromptTemplate::from_json_file(dir / "t.json");
  PromptFields f;
  f.target_title = "X";
  f.user_code = dd("1");
  f.item_code = dd("2");
  CHECK(render_prompt(t, f, CorpusMode::full) == "None|1|X|2");
  binrec::testing::write_text(dir / "bad.json", R"({"full": 3})");
  CHECK_THROWS_AS(PromptTemplate::from_json_file(dir / "bad.json"), ConfigError);
}

TEST_CASE("completions") {
  CHECK(completion_for_label(1) == "Yes");
  CHECK(completion_for_label(0) == "No");
  CHECK_THROWS(completion_for_label(2));
  CHECK(parse_corpus_mode("text_only") == CorpusMode::text_only);
  CHECK_THROWS_AS(parse_corpus_mode("both"), ConfigError);
}

namespace {

struct Fixture {
  SplitSet split;
  ItemCatalog catalog;
  CodeTable codes;

  Fixture() {
    split = assemble_split(
        {row("u1", "a", 1, 1), row("u1", "b", 2, 0), row("u2", "a", 2, 1), row("u1", "c", 3, 1),
         row("u1", "d", 3, 1), row("u2", "e", 4, 0), row("u1", "a", 5, 1), row("u2", "c", 6, 1)},
        {row("u1", "e", 7, 1), row("u2", "b", 8, 0)},
        {row("u1", "f", 9, 0), row("u3", "a", 10, 1)});
    for (const char* i : {"a", "b", "c", "d", "e", "f"}) {
      catalog[i] = std::string("Title ") + i;
      codes.items[i] = dd("1.1");
    }
    for (const char* u : {"u1", "u2", "u3"}) codes.users[u] = dd("172.16.254.1");
  }
};

}  // namespace

TEST_CASE("corpus records follow the partition with consistent completions") {
  Fixture fx;
  CorpusOptions opt;
  const auto recs = build_corpus(fx.split, Partition::train, fx.catalog, &fx.codes, PromptTemplate::standard(), opt);
  REQUIRE(recs.size() == 8);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(recs[k].completion == completion_for_label(fx.split.train[k].label));
    CHECK(recs[k].item_id == fx.split.train[k].item_id);
  }
  CHECK(recs[0].prompt.find("books: None.") != std::string::npos);
}

TEST_CASE("histories use strictly earlier positives and never the target") {
  Fixture fx;
  const auto recs = build_corpus(fx.split, Partition::train, fx.catalog, nullptr, PromptTemplate::standard(),
                                 {CorpusMode::text_only, 10, {}});
  // u1 rates d at ts=3 alongside c: c is not strictly earlier.
  CHECK(recs[4].item_id == "d");
  CHECK(recs[4].prompt.find("books: \"Title a\".") != std::string::npos);
  // u1 re-rates a at ts=5: a itself is excluded, b was negative.
  CHECK(recs[6].item_id == "a");
  CHECK(recs[6].prompt.find("books: \"Title c\", \"Title d\".") != std::string::npos);

  const auto test = build_corpus(fx.split, Partition::test, fx.catalog, nullptr, PromptTemplate::standard(),
                                 {CorpusMode::text_only, 10, {}});
  // Histories are event sequences, so a re-rated item appears once per positive event.
  CHECK(test[0].prompt.find("books: \"Title a\", \"Title c\", \"Title d\", \"Title a\", \"Title e\".") !=
        std::string::npos);
  CHECK(test[1].prompt.find("books: None.") != std::string::npos);
  CHECK(test[1].segment == SegmentTag::cold);
}

TEST_CASE("text-only corpora carry no code text") {
  Fixture fx;
  for (auto p : {Partition::train, Partition::valid, Partition::test}) {
    for (const auto& r : build_corpus(fx.split, p, fx.catalog, &fx.codes, PromptTemplate::standard(),
                                      {CorpusMode::text_only, 10, {}})) {
      CHECK_FALSE(contains_code_text(r.prompt));
    }
  }
}

TEST_CASE("missing titles or codes name the entity") {
  Fixture fx;
  fx.catalog.erase("c");
  CHECK_THROWS_WITH_AS(build_corpus(fx.split, Partition::train, fx.catalog, nullptr, PromptTemplate::standard(),
                                    {CorpusMode::text_only, 10, {}}),
                       doctest::Contains("c"), DataError);
  Fixture fy;
  fy.codes.users.erase("u2");
  CHECK_THROWS_WITH_AS(build_corpus(fy.split, Partition::train, fy.catalog, &fy.codes, PromptTemplate::standard(),
                                    {CorpusMode::full, 10, {}}),
                       doctest::Contains("u2"), DataError);
  CHECK_THROWS_AS(build_corpus(fy.split, Partition::train, fy.catalog, nullptr, PromptTemplate::standard(),
                               {CorpusMode::full, 10, {}}),
                  DataError);
}

TEST_CASE("corpus files are deterministic and round-trip") {
  Fixture fx;
  binrec::testing::TempDir dir;
  const auto recs = build_corpus(fx.split, Partition::valid, fx.catalog, &fx.codes, PromptTemplate::standard(), {});
  std::ostringstream a, b;
  write_corpus(a, recs);
  write_corpus(b, build_corpus(fx.split, Partition::valid, fx.catalog, &fx.codes, PromptTemplate::standard(), {}));
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\r") == std::string::npos);
  CHECK(a.str().rfind("{\"prompt\":", 0) == 0);
  CHECK(a.str().find("\"completion\":\"Yes\",\"user_id\":\"u1\",\"item_id\":\"e\",\"segment\":") != std::string::npos);

  binrec::testing::write_text(dir / "c.jsonl", a.str());
  const auto back = read_corpus(dir / "c.jsonl");
  REQUIRE(back.size() == recs.size());
  CHECK(back[0].prompt == recs[0].prompt);
  CHECK(back[1].completion == "No");

  binrec::testing::write_text(dir / "bad.jsonl", R"({"prompt":"p","completion":"Maybe","user_id":"u","item_id":"i","segment":"warm"})"
                                                 "\n");
  CHECK_THROWS_AS(read_corpus(dir / "bad.jsonl"), DataError);
}

#include "binrec/promptgen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "binrec/error.hpp"

namespace binrec {

namespace {

constexpr std::string_view kStandardFull =
    "#Question: A user has given high ratings to the following books: <ItemTitleList>. "
    "Additionally, we have information about the user's preferences encoded in the feature <UserID>. "
    "Using all available information, make a prediction about whether the user would enjoy the book titled "
    "<TargetItemTitle> with the feature <TargetItemID>? Answer with \"Yes\" or \"No\". \n#Answer:";

constexpr std::string_view kStandardTextOnly =
    "#Question: A user has given high ratings to the following books: <ItemTitleList>. "
    "Using all available information, make a prediction about whether the user would enjoy the book titled "
    "<TargetItemTitle>? Answer with \"Yes\" or \"No\". \n#Answer:";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool is_placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

std::string join_history(std::span<const std::string> titles, std::size_t history_len) {
  const std::size_t keep = std::min(titles.size(), history_len);
  if (keep == 0) return "None";
  std::string out;
  for (std::size_t k = titles.size() - keep; k < titles.size(); ++k) {
    if (!out.empty()) out += ", ";
    out += '"';
    out += titles[k];
    out += '"';
  }
  return out;
}

}  // namespace

std::string_view to_string(CorpusMode mode) { return mode == CorpusMode::full ? "full" : "text_only"; }

CorpusMode parse_corpus_mode(std::string_view name) {
  if (name == "full") return CorpusMode::full;
  if (name == "text_only") return CorpusMode::text_only;
  throw ConfigError("unknown corpus mode: " + std::string(name) + " (expected text_only or full)");
}

PromptTemplate::PromptTemplate(std::string full, std::string text_only)
    : full_(std::move(full)), text_only_(std::move(text_only)) {
  for (const auto name : {kItemTitleList, kUserId, kTargetItemTitle, kTargetItemId}) {
    if (count_occurrences(full_, name) != 1) {
      throw ConfigError("full template must contain " + std::string(name) + " exactly once");
    }
  }
  for (const auto name : {kItemTitleList, kTargetItemTitle}) {
    if (count_occurrences(text_only_, name) != 1) {
      throw ConfigError("text-only template must contain " + std::string(name) + " exactly once");
    }
  }
  for (const auto name : {kUserId, kTargetItemId}) {
    if (count_occurrences(text_only_, name) != 0) {
      throw ConfigError("text-only template must not contain " + std::string(name));
    }
  }
}

PromptTemplate PromptTemplate::standard() {
  return PromptTemplate(std::string(kStandardFull), std::string(kStandardTextOnly));
}

PromptTemplate PromptTemplate::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open template file: " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    return PromptTemplate(doc.at("full").get<std::string>(), doc.at("text_only").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string render_prompt(const PromptTemplate& tmpl, const PromptFields& fields, CorpusMode mode,
                          std::size_t history_len) {
  if (mode == CorpusMode::full && (!fields.user_code || !fields.item_code)) {
    throw DataError("full-mode prompt needs both user and item codes");
  }
  const std::string& text = tmpl.text(mode);
  std::string out;
  out.reserve(text.size() + 256);

  // Single left-to-right pass: substituted values are never rescanned.
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('<', pos);
    if (open == std::string::npos) {
      out.append(text, pos);
      break;
    }
    auto close = open + 1;
    while (close < text.size() && is_placeholder_char(text[close])) ++close;
    if (close == open + 1 || close >= text.size() || text[close] != '>') {
      out.append(text, pos, open + 1 - pos);
      pos = open + 1;
      continue;
    }
    out.append(text, pos, open - pos);
    const std::string_view token(text.data() + open, close + 1 - open);
    if (token == kItemTitleList) {
      out += join_history(fields.history_titles, history_len);
    } else if (token == kTargetItemTitle) {
      out += fields.target_title;
    } else if (token == kUserId && mode == CorpusMode::full) {
      out += fields.user_code->text;
    } else if (token == kTargetItemId && mode == CorpusMode::full) {
      out += fields.item_code->text;
    } else {
      throw ConfigError("unknown placeholder " + std::string(token) + " in prompt template");
    }
    pos = close + 1;
  }
  return out;
}

std::string_view completion_for_label(int label) {
  if (label == 1) return "Yes";
  if (label == 0) return "No";
  throw DataError("label must be 0 or 1, got " + std::to_string(label));
}

CodeTable CodeTable::from_dump(const CodeDump& dump) {
  CodeTable table;
  for (const auto& e : dump.entries) {
    auto& target = e.kind == EntityKind::user ? table.users : table.items;
    target.insert_or_assign(e.id, e.code);
  }
  return table;
}

namespace {

struct HistoryEvent {
  std::int64_t timestamp;
  const std::string* item_id;
};

}  // namespace

std::vector<PromptRecord> build_corpus(const SplitSet& split, Partition partition, const ItemCatalog& catalog,
                                       const CodeTable* codes, const PromptTemplate& tmpl,
                                       const CorpusOptions& options) {
  const bool full = options.mode == CorpusMode::full;
  if (full && codes == nullptr) throw DataError("full-mode corpus needs a code table");

  // Positive events per user, in (timestamp, split order).
  std::vector<std::vector<HistoryEvent>> positives(split.users.size());
  for (const auto p : {Partition::train, Partition::valid, Partition::test}) {
    for (const auto& r : split.rows(p)) {
      if (r.label == 1) positives[split.users.at(r.user_id)].push_back({r.timestamp, &r.item_id});
    }
  }
  for (auto& events : positives) {
    std::stable_sort(events.begin(), events.end(),
                     [](const HistoryEvent& a, const HistoryEvent& b) { return a.timestamp < b.timestamp; });
  }

  const auto title_of = [&](const std::string& item_id) -> const std::string& {
    const auto it = catalog.find(item_id);
    if (it == catalog.end()) throw DataError("no title for item " + item_id);
    return it->second;
  };
  const auto code_of = [&](const std::unordered_map<std::string, CodeText>& table, const std::string& id,
                           EntityKind kind) -> const CodeText& {
    const auto it = table.find(id);
    if (it == table.end()) throw DataError("no code for " + std::string(to_string(kind)) + " " + id);
    return it->second;
  };

  const auto& rows = split.rows(partition);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].timestamp < rows[b].timestamp; });

  const auto counts = TrainCounts::from(split);
  std::vector<PromptRecord> records;
  records.reserve(rows.size());
  for (const auto k : order) {
    const auto& row = rows[k];
    const auto user = split.users.at(row.user_id);
    const auto item = split.items.at(row.item_id);

    PromptFields fields;
    fields.target_title = title_of(row.item_id);
    const auto& events = positives[user];
    auto end = std::lower_bound(events.begin(), events.end(), row.timestamp,
                                [](const HistoryEvent& e, std::int64_t t) { return e.timestamp < t; });
    std::vector<const std::string*> picked;
    for (auto it = end; it != events.begin() && picked.size() < options.history_len;) {
      --it;
      if (*it->item_id != row.item_id) picked.push_back(it->item_id);
    }
    for (auto it = picked.rbegin(); it != picked.rend(); ++it) fields.history_titles.push_back(title_of(**it));
    if (full) {
      fields.user_code = code_of(codes->users, row.user_id, EntityKind::user);
      fields.item_code = code_of(codes->items, row.item_id, EntityKind::item);
    }

    PromptRecord rec;
    rec.prompt = render_prompt(tmpl, fields, options.mode, options.history_len);
    rec.completion = std::string(completion_for_label(row.label));
    rec.user_id = row.user_id;
    rec.item_id = row.item_id;
    rec.segment = counts.segment(user, item, options.thresholds);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_corpus(std::ostream& out, std::span<const PromptRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["prompt"] = r.prompt;
    j["completion"] = r.completion;
    j["user_id"] = r.user_id;
    j["item_id"] = r.item_id;
    j["segment"] = to_string(r.segment);
    out << j.dump() << '\n';
  }
}

std::vector<PromptRecord> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus: " + path.string());
  std::vector<PromptRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      PromptRecord r;
      r.prompt = j.at("prompt").get<std::string>();
      r.completion = j.at("completion").get<std::string>();
      r.user_id = j.at("user_id").get<std::string>();
      r.item_id = j.at("item_id").get<std::string>();
      const auto segment = j.at("segment").get<std::string>();
      if (r.completion != "Yes" && r.completion != "No") {
        throw DataError(where + ": completion must be \"Yes\" or \"No\"");
      }
      if (segment != "warm" && segment != "cold") throw DataError(where + ": unknown segment '" + segment + "'");
      r.segment = segment == "warm" ? SegmentTag::warm : SegmentTag::cold;
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace binrec

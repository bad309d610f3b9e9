#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "binrec/codec.hpp"
#include "binrec/dataset.hpp"

namespace binrec {

inline constexpr std::string_view kItemTitleList = "<ItemTitleList>";
inline constexpr std::string_view kUserId = "<UserID>";
inline constexpr std::string_view kTargetItemTitle = "<TargetItemTitle>";
inline constexpr std::string_view kTargetItemId = "<TargetItemID>";

enum class CorpusMode { text_only, full };

std::string_view to_string(CorpusMode mode);
CorpusMode parse_corpus_mode(std::string_view name);

// A prompt template in both corpus modes. The full variant holds all four
// placeholders exactly once; the text-only variant holds the two textual
// placeholders exactly once and neither ID placeholder.
class PromptTemplate {
 public:
  /// Throws ConfigError if either variant breaks the placeholder rules.
  PromptTemplate(std::string full, std::string text_only);

  /// The default question/answer template.
  static PromptTemplate standard();

  /// Reads {"full": "...", "text_only": "..."} from a JSON file.
  static PromptTemplate from_json_file(const std::filesystem::path& path);

  const std::string& text(CorpusMode mode) const { return mode == CorpusMode::full ? full_ : text_only_; }

 private:
  std::string full_;
  std::string text_only_;
};

struct PromptFields {
  std::vector<std::string> history_titles;  // oldest first
  std::string target_title;
  std::optional<CodeText> user_code;
  std::optional<CodeText> item_code;
};

/// Fills the template for `mode`. History titles are quoted and joined with
/// ", " (newest `history_len` kept, most recent last); an empty history
/// renders as None. Throws ConfigError if the template still contains an
/// unknown <Placeholder>, and DataError if full mode lacks a code.
std::string render_prompt(const PromptTemplate& tmpl, const PromptFields& fields, CorpusMode mode,
                          std::size_t history_len = 10);

std::string_view completion_for_label(int label);

struct PromptRecord {
  std::string prompt;
  std::string completion;
  std::string user_id;
  std::string item_id;
  SegmentTag segment = SegmentTag::warm;
};

// Rendered code text keyed by entity id.
struct CodeTable {
  std::unordered_map<std::string, CodeText> users;
  std::unordered_map<std::string, CodeText> items;

  static CodeTable from_dump(const CodeDump& dump);
};

struct CorpusOptions {
  CorpusMode mode = CorpusMode::full;
  std::size_t history_len = 10;
  WarmColdThresholds thresholds;
};

/// One record per row of `partition`, ordered by (timestamp, split order).
/// Histories draw on positively labeled rows of the same user across all
/// partitions with a strictly earlier timestamp, excluding the target item.
/// Throws DataError naming any entity without a title or (full mode) a code.
std::vector<PromptRecord> build_corpus(const SplitSet& split, Partition partition, const ItemCatalog& catalog,
                                       const CodeTable* codes, const PromptTemplate& tmpl,
                                       const CorpusOptions& options);

/// JSON Lines: prompt, completion, user_id, item_id, segment; LF line ends.
void write_corpus(std::ostream& out, std::span<const PromptRecord> records);
std::vector<PromptRecord> read_corpus(const std::filesystem::path& path);

}  // namespace binrec

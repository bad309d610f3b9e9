#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace binrec {

struct Interaction {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

struct LabeledInteraction : Interaction {
  int label = 0;
};

/// Column layout of a delimited interaction file.
struct InteractionSchema {
  std::string separator = "::";
  std::size_t user_column = 0;
  std::size_t item_column = 1;
  std::size_t rating_column = 2;
  std::size_t timestamp_column = 3;
  bool skip_header = false;

  static InteractionSchema movielens() { return {}; }
  static InteractionSchema csv() {
    InteractionSchema s;
    s.separator = ",";
    return s;
  }
};

struct CatalogSchema {
  std::string separator = "::";
  std::size_t item_column = 0;
  std::size_t title_column = 1;
  bool skip_header = false;
};

using WarningSink = std::function<void(const std::string&)>;

/// Prints "warning: <msg>" to stderr.
void stderr_warning(const std::string& message);

/// Splits on a (possibly multi-character) separator; empty fields are kept.
std::vector<std::string_view> split_fields(std::string_view line, std::string_view separator);

/// Reads one interaction per non-blank row. Throws DataError naming the path
/// or the 1-based line number of the first malformed row.
std::vector<Interaction> ingest_interactions(const std::filesystem::path& path,
                                             const InteractionSchema& schema);

/// label = 1 iff rating > positive_threshold.
std::vector<LabeledInteraction> binarize_labels(const std::vector<Interaction>& interactions,
                                                double positive_threshold);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

// Dense 0-based index over opaque identifiers, in first-seen order.
class IdIndex {
 public:
  std::uint32_t insert(const std::string& id);
  std::optional<std::uint32_t> find(const std::string& id) const;
  std::uint32_t at(const std::string& id) const;
  const std::string& id(std::uint32_t index) const { return ids_.at(index); }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::vector<std::string> ids_;
};

enum class Partition { train, valid, test };

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view name);

struct SplitSet {
  std::vector<LabeledInteraction> train;
  std::vector<LabeledInteraction> valid;
  std::vector<LabeledInteraction> test;
  IdIndex users;
  IdIndex items;

  const std::vector<LabeledInteraction>& rows(Partition p) const;
};

/// Stable sort by timestamp, cut at the ratio boundaries. Index maps are
/// assigned in first-seen order over train, then valid, then test.
SplitSet chronological_split(const std::vector<LabeledInteraction>& labeled, const SplitRatios& ratios);

/// Rebuilds a SplitSet from already-partitioned rows using the same indexing rule.
SplitSet assemble_split(std::vector<LabeledInteraction> train, std::vector<LabeledInteraction> valid,
                        std::vector<LabeledInteraction> test);

enum class SegmentTag { warm, cold };

std::string_view to_string(SegmentTag tag);

struct WarmColdThresholds {
  std::size_t min_user = 3;
  std::size_t min_item = 3;
};

// Training-interaction counts per dense user/item index.
struct TrainCounts {
  std::vector<std::size_t> per_user;
  std::vector<std::size_t> per_item;

  static TrainCounts from(const SplitSet& split);
  SegmentTag segment(std::uint32_t user, std::uint32_t item, const WarmColdThresholds& t) const;
};

/// One tag per test row, aligned with split.test.
std::vector<SegmentTag> partition_warm_cold(const SplitSet& split, const WarmColdThresholds& thresholds);

using ItemCatalog = std::unordered_map<std::string, std::string>;

/// Titles are trimmed; empty titles are skipped and duplicate ids keep the
/// last row, both with a warning. Titles that are not valid UTF-8 are
/// transcoded from Latin-1.
ItemCatalog load_item_catalog(const std::filesystem::path& path, const CatalogSchema& schema,
                              const WarningSink& warn = stderr_warning);

// --- persistence -----------------------------------------------------------

/// Writes train.tsv / valid.tsv / test.tsv and manifest.json into dir.
/// Returns the manifest document.
nlohmann::ordered_json write_split(const std::filesystem::path& dir, const SplitSet& split,
                                   const nlohmann::ordered_json& provenance);

/// Reads a directory written by write_split, verifying each partition file
/// against the content hash recorded in the manifest.
SplitSet read_split(const std::filesystem::path& dir);

bool is_valid_utf8(std::string_view text);
std::string latin1_to_utf8(std::string_view text);

}  // namespace binrec

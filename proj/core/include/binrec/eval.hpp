#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binrec/binary_code.hpp"
#include "binrec/collab.hpp"
#include "binrec/dataset.hpp"

namespace binrec {

struct ScoredExample {
  std::string user_id;
  std::string item_id;
  double score = 0.0;
  int label = 0;
  SegmentTag segment = SegmentTag::warm;
};

/// Rank-based ROC AUC; tied scores share their average rank.
/// Throws UndefinedMetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);
double auc(std::span<const ScoredExample> examples);

struct UaucResult {
  double value = 0.0;
  std::size_t users_counted = 0;
  std::size_t users_excluded = 0;
};

/// Unweighted mean of per-user AUC over users having both classes.
/// Throws UndefinedMetricError when no user qualifies.
UaucResult uauc(std::span<const ScoredExample> examples);

/// popcount(code_u & code_i).
std::size_t bitwise_and_score(const BinaryCode& code_u, const BinaryCode& code_i);

enum class ScorerKind { mf, binmf, bit_and };

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer(std::string_view name);

// Maps dense (user, item) indices to a real-valued score.
using Scorer = std::function<double(std::uint32_t user, std::uint32_t item)>;

Scorer make_mf_scorer(const CollabModel& model);
Scorer make_binmf_scorer(const CodeBook& codes, double temperature);
Scorer make_bit_and_scorer(const CodeBook& codes);

struct SegmentMetrics {
  std::string segment;  // "all", "warm" or "cold"
  std::size_t n_examples = 0;
  std::size_t n_users = 0;
  std::optional<double> auc;
  std::optional<double> uauc;
  std::size_t n_users_counted = 0;
  std::size_t n_users_excluded = 0;
  std::string error;  // why a metric is missing
};

struct MetricsReport {
  std::string scorer;
  std::vector<SegmentMetrics> segments;

  const SegmentMetrics* find(std::string_view segment) const;
};

/// Metrics for "all" followed by "warm" and "cold". A segment whose metric is
/// undefined records the reason and leaves the others untouched.
MetricsReport summarize(std::string scorer_name, std::span<const ScoredExample> examples);

/// Scores every test interaction with `scorer` and summarizes per segment.
/// `tags` must be aligned with split.test.
std::vector<ScoredExample> score_test(const Scorer& scorer, const SplitSet& split, std::span<const SegmentTag> tags);

MetricsReport evaluate(ScorerKind kind, const Scorer& scorer, const SplitSet& split, std::span<const SegmentTag> tags);

nlohmann::ordered_json to_json(const MetricsReport& report);
std::string to_table(const MetricsReport& report);

/// JSON Lines per-example dump: user_id, item_id, score, label, segment.
void write_score_dump(std::ostream& out, std::span<const ScoredExample> examples);
std::vector<ScoredExample> read_score_dump(const std::filesystem::path& path);

}  // namespace binrec

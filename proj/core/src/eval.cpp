#include "binrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "binrec/error.hpp"

namespace binrec {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: scores and labels differ in length");
  }
  std::uint64_t n_pos = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) throw DataError("auc: labels must be 0 or 1");
    if (!std::isfinite(scores[k])) throw DataError("auc: non-finite score");
    n_pos += static_cast<std::uint64_t>(labels[k]);
  }
  const std::uint64_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError("AUC is undefined without both positive and negative examples");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the 1-based average rank of a tie group [i, j) is i + 1 + j, an
  // integer, so the rank sum stays exact.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    std::uint64_t group_pos = 0;
    for (std::size_t k = i; k < j; ++k) group_pos += static_cast<std::uint64_t>(labels[order[k]]);
    twice_rank_sum += group_pos * (i + 1 + j);
    i = j;
  }
  const auto numerator = static_cast<double>(twice_rank_sum - n_pos * (n_pos + 1));
  return numerator / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc(std::span<const ScoredExample> examples) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(examples.size());
  labels.reserve(examples.size());
  for (const auto& ex : examples) {
    scores.push_back(ex.score);
    labels.push_back(ex.label);
  }
  return auc(scores, labels);
}

UaucResult uauc(std::span<const ScoredExample> examples) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<int>> labels;
  for (const auto& ex : examples) {
    const auto [it, inserted] = slot.try_emplace(ex.user_id, scores.size());
    if (inserted) {
      scores.emplace_back();
      labels.emplace_back();
    }
    scores[it->second].push_back(ex.score);
    labels[it->second].push_back(ex.label);
  }

  UaucResult result;
  double sum = 0.0;
  for (std::size_t u = 0; u < scores.size(); ++u) {
    const auto pos = std::count(labels[u].begin(), labels[u].end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels[u].size())) {
      ++result.users_excluded;
      continue;
    }
    sum += auc(scores[u], labels[u]);
    ++result.users_counted;
  }
  if (result.users_counted == 0) {
    throw UndefinedMetricError("UAUC is undefined: no user has both positive and negative examples");
  }
  result.value = sum / static_cast<double>(result.users_counted);
  return result;
}

std::size_t bitwise_and_score(const BinaryCode& code_u, const BinaryCode& code_i) {
  return and_popcount(code_u, code_i);
}

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::mf: return "mf";
    case ScorerKind::binmf: return "binmf";
    case ScorerKind::bit_and: return "bit_and";
  }
  return "?";
}

ScorerKind parse_scorer(std::string_view name) {
  if (name == "mf") return ScorerKind::mf;
  if (name == "binmf") return ScorerKind::binmf;
  if (name == "bit_and") return ScorerKind::bit_and;
  throw ConfigError("unknown scorer: " + std::string(name) + " (expected mf, binmf or bit_and)");
}

Scorer make_mf_scorer(const CollabModel& model) {
  return [&model](std::uint32_t u, std::uint32_t i) {
    return score_mf(embed(model, u, EntityKind::user), embed(model, i, EntityKind::item));
  };
}

Scorer make_binmf_scorer(const CodeBook& codes, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  return [&codes, temperature](std::uint32_t u, std::uint32_t i) {
    return score_binmf(codes.lookup(u, EntityKind::user), codes.lookup(i, EntityKind::item), temperature);
  };
}

Scorer make_bit_and_scorer(const CodeBook& codes) {
  return [&codes](std::uint32_t u, std::uint32_t i) {
    return static_cast<double>(bitwise_and_score(codes.lookup(u, EntityKind::user), codes.lookup(i, EntityKind::item)));
  };
}

const SegmentMetrics* MetricsReport::find(std::string_view segment) const {
  for (const auto& s : segments) {
    if (s.segment == segment) return &s;
  }
  return nullptr;
}

namespace {

SegmentMetrics segment_metrics(std::string name, std::span<const ScoredExample> examples) {
  SegmentMetrics m;
  m.segment = std::move(name);
  m.n_examples = examples.size();
  std::vector<std::string_view> users;
  users.reserve(examples.size());
  for (const auto& ex : examples) users.push_back(ex.user_id);
  std::sort(users.begin(), users.end());
  m.n_users = static_cast<std::size_t>(std::unique(users.begin(), users.end()) - users.begin());

  std::vector<std::string> errors;
  try {
    m.auc = auc(examples);
  } catch (const UndefinedMetricError& e) {
    errors.emplace_back(e.what());
  }
  try {
    const auto u = uauc(examples);
    m.uauc = u.value;
    m.n_users_counted = u.users_counted;
    m.n_users_excluded = u.users_excluded;
  } catch (const UndefinedMetricError& e) {
    m.n_users_excluded = m.n_users;
    errors.emplace_back(e.what());
  }
  for (std::size_t k = 0; k < errors.size(); ++k) m.error += (k ? "; " : "") + errors[k];
  return m;
}

}  // namespace

MetricsReport summarize(std::string scorer_name, std::span<const ScoredExample> examples) {
  MetricsReport report;
  report.scorer = std::move(scorer_name);
  report.segments.push_back(segment_metrics("all", examples));
  for (const auto tag : {SegmentTag::warm, SegmentTag::cold}) {
    std::vector<ScoredExample> subset;
    std::copy_if(examples.begin(), examples.end(), std::back_inserter(subset),
                 [tag](const ScoredExample& ex) { return ex.segment == tag; });
    report.segments.push_back(segment_metrics(std::string(to_string(tag)), subset));
  }
  return report;
}

std::vector<ScoredExample> score_test(const Scorer& scorer, const SplitSet& split, std::span<const SegmentTag> tags) {
  if (tags.size() != split.test.size()) {
    throw InvariantError("segment tags are not aligned with the test partition");
  }
  std::vector<ScoredExample> out;
  out.reserve(split.test.size());
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    const auto& row = split.test[k];
    const double s = scorer(split.users.at(row.user_id), split.items.at(row.item_id));
    out.push_back({row.user_id, row.item_id, s, row.label, tags[k]});
  }
  return out;
}

MetricsReport evaluate(ScorerKind kind, const Scorer& scorer, const SplitSet& split, std::span<const SegmentTag> tags) {
  const auto examples = score_test(scorer, split, tags);
  return summarize(std::string(to_string(kind)), examples);
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["scorer"] = report.scorer;
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : report.segments) {
    nlohmann::ordered_json j;
    j["segment"] = s.segment;
    j["n_examples"] = s.n_examples;
    j["n_users"] = s.n_users;
    j["auc"] = s.auc ? nlohmann::ordered_json(*s.auc) : nlohmann::ordered_json(nullptr);
    j["uauc"] = s.uauc ? nlohmann::ordered_json(*s.uauc) : nlohmann::ordered_json(nullptr);
    j["n_users_counted"] = s.n_users_counted;
    j["n_users_excluded"] = s.n_users_excluded;
    if (!s.error.empty()) j["error"] = s.error;
    segments.push_back(std::move(j));
  }
  doc["segments"] = std::move(segments);
  return doc;
}

std::string to_table(const MetricsReport& report) {
  std::ostringstream out;
  const auto metric = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) {
      s << std::fixed << std::setprecision(4) << *v;
    } else {
      s << "n/a";
    }
    return s.str();
  };
  out << "scorer: " << report.scorer << '\n';
  out << std::left << std::setw(8) << "segment" << std::right << std::setw(10) << "examples" << std::setw(8)
      << "users" << std::setw(9) << "AUC" << std::setw(9) << "UAUC" << std::setw(9) << "counted" << std::setw(10)
      << "excluded" << '\n';
  for (const auto& s : report.segments) {
    out << std::left << std::setw(8) << s.segment << std::right << std::setw(10) << s.n_examples << std::setw(8)
        << s.n_users << std::setw(9) << metric(s.auc) << std::setw(9) << metric(s.uauc) << std::setw(9)
        << s.n_users_counted << std::setw(10) << s.n_users_excluded << '\n';
  }
  return out.str();
}

void write_score_dump(std::ostream& out, std::span<const ScoredExample> examples) {
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["user_id"] = ex.user_id;
    j["item_id"] = ex.item_id;
    j["score"] = ex.score;
    j["label"] = ex.label;
    j["segment"] = to_string(ex.segment);
    out << j.dump() << '\n';
  }
}

std::vector<ScoredExample> read_score_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<ScoredExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      ScoredExample ex;
      ex.user_id = j.at("user_id").get<std::string>();
      ex.item_id = j.at("item_id").get<std::string>();
      ex.score = j.at("score").get<double>();
      ex.label = j.at("label").get<int>();
      const auto segment = j.at("segment").get<std::string>();
      if (segment == "warm") {
        ex.segment = SegmentTag::warm;
      } else if (segment == "cold") {
        ex.segment = SegmentTag::cold;
      } else {
        throw DataError(where + ": unknown segment '" + segment + "'");
      }
      if (!std::isfinite(ex.score)) throw DataError(where + ": non-finite score");
      if (ex.label != 0 && ex.label != 1) throw DataError(where + ": label must be 0 or 1");
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace binrec

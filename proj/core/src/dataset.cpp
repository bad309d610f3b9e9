#include "binrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "binrec/content_hash.hpp"
#include "binrec/error.hpp"

namespace binrec {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kWhitespace = " \t\r\n";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  return in;
}

std::string where(const fs::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is available in libstdc++ 11.
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
  }
}

// Partition boundary for a cumulative fraction, tolerant of representation
// error in the ratio (0.8 * 10 must give 8).
std::size_t boundary(std::size_t n, double cumulative) {
  const double exact = cumulative * static_cast<double>(n);
  const auto cut = static_cast<std::size_t>(std::floor(exact + 1e-9));
  return std::min(cut, n);
}

constexpr std::string_view kSplitHeader = "user_id\titem_id\trating\ttimestamp\tlabel";

void write_partition(const fs::path& file, const std::vector<LabeledInteraction>& rows) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + file.string());
  out << kSplitHeader << '\n';
  for (const auto& r : rows) {
    char rating[32];
    const auto res = std::to_chars(rating, rating + sizeof rating, r.rating);
    out << r.user_id << '\t' << r.item_id << '\t' << std::string_view(rating, res.ptr - rating) << '\t'
        << r.timestamp << '\t' << r.label << '\n';
  }
  if (!out) throw DataError("failed writing file: " + file.string());
}

std::vector<LabeledInteraction> read_partition(const fs::path& file) {
  auto in = open_or_throw(file);
  std::vector<LabeledInteraction> rows;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kSplitHeader) {
    throw DataError(file.string() + ": missing or unexpected header line");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, "\t");
    LabeledInteraction r;
    if (fields.size() != 5 || fields[0].empty() || fields[1].empty() ||
        !parse_number(fields[2], r.rating) || !parse_number(fields[3], r.timestamp) ||
        !parse_number(fields[4], r.label) || (r.label != 0 && r.label != 1)) {
      throw DataError(where(file, line_no) + ": malformed split row");
    }
    r.user_id = std::string(fields[0]);
    r.item_id = std::string(fields[1]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

void stderr_warning(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::vector<std::string_view> split_fields(std::string_view line, std::string_view separator) {
  std::vector<std::string_view> out;
  if (separator.empty()) {
    out.push_back(line);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(separator, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + separator.size();
  }
}

std::vector<Interaction> ingest_interactions(const fs::path& path, const InteractionSchema& schema) {
  if (schema.separator.empty()) throw ConfigError("interaction separator must not be empty");
  auto in = open_or_throw(path);
  const std::size_t needed =
      1 + std::max({schema.user_column, schema.item_column, schema.rating_column, schema.timestamp_column});

  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.skip_header) continue;
    if (trim(line).empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto fields = split_fields(line, schema.separator);
    if (fields.size() < needed) {
      throw DataError(where(path, line_no) + ": expected at least " + std::to_string(needed) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Interaction row;
    row.user_id = std::string(trim(fields[schema.user_column]));
    row.item_id = std::string(trim(fields[schema.item_column]));
    if (row.user_id.empty() || row.item_id.empty()) {
      throw DataError(where(path, line_no) + ": empty user or item id");
    }
    if (!parse_number(fields[schema.rating_column], row.rating)) {
      throw DataError(where(path, line_no) + ": unparsable rating '" + std::string(fields[schema.rating_column]) +
                      "'");
    }
    if (!parse_number(fields[schema.timestamp_column], row.timestamp) || row.timestamp < 0) {
      throw DataError(where(path, line_no) + ": unparsable timestamp '" +
                      std::string(fields[schema.timestamp_column]) + "'");
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<LabeledInteraction> binarize_labels(const std::vector<Interaction>& interactions,
                                                double positive_threshold) {
  if (!std::isfinite(positive_threshold)) throw ConfigError("label threshold must be finite");
  std::vector<LabeledInteraction> out;
  out.reserve(interactions.size());
  for (const auto& row : interactions) {
    LabeledInteraction labeled;
    static_cast<Interaction&>(labeled) = row;
    labeled.label = row.rating > positive_threshold ? 1 : 0;
    out.push_back(std::move(labeled));
  }
  return out;
}

std::uint32_t IdIndex::insert(const std::string& id) {
  const auto [it, inserted] = lookup_.try_emplace(id, static_cast<std::uint32_t>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<std::uint32_t> IdIndex::find(const std::string& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t IdIndex::at(const std::string& id) const {
  const auto idx = find(id);
  if (!idx) throw DataError("unknown identifier: " + id);
  return *idx;
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::valid: return "valid";
    case Partition::test: return "test";
  }
  return "?";
}

Partition parse_partition(std::string_view name) {
  if (name == "train") return Partition::train;
  if (name == "valid") return Partition::valid;
  if (name == "test") return Partition::test;
  throw ConfigError("unknown partition: " + std::string(name));
}

const std::vector<LabeledInteraction>& SplitSet::rows(Partition p) const {
  switch (p) {
    case Partition::train: return train;
    case Partition::valid: return valid;
    case Partition::test: return test;
  }
  throw InvariantError("bad partition");
}

SplitSet assemble_split(std::vector<LabeledInteraction> train, std::vector<LabeledInteraction> valid,
                        std::vector<LabeledInteraction> test) {
  SplitSet split;
  split.train = std::move(train);
  split.valid = std::move(valid);
  split.test = std::move(test);
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const auto& r : *part) {
      split.users.insert(r.user_id);
      split.items.insert(r.item_id);
    }
  }
  return split;
}

SplitSet chronological_split(const std::vector<LabeledInteraction>& labeled, const SplitRatios& ratios) {
  if (labeled.empty()) throw DataError("cannot split an empty interaction set");
  if (!(ratios.train > 0 && ratios.valid > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }

  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labeled[a].timestamp < labeled[b].timestamp;
  });

  const std::size_t n = labeled.size();
  const std::size_t train_end = boundary(n, ratios.train);
  const std::size_t valid_end = std::max(train_end, boundary(n, ratios.train + ratios.valid));

  std::vector<LabeledInteraction> train, valid, test;
  train.reserve(train_end);
  valid.reserve(valid_end - train_end);
  test.reserve(n - valid_end);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& row = labeled[order[k]];
    if (k < train_end) {
      train.push_back(row);
    } else if (k < valid_end) {
      valid.push_back(row);
    } else {
      test.push_back(row);
    }
  }
  return assemble_split(std::move(train), std::move(valid), std::move(test));
}

std::string_view to_string(SegmentTag tag) { return tag == SegmentTag::warm ? "warm" : "cold"; }

TrainCounts TrainCounts::from(const SplitSet& split) {
  TrainCounts counts;
  counts.per_user.assign(split.users.size(), 0);
  counts.per_item.assign(split.items.size(), 0);
  for (const auto& r : split.train) {
    ++counts.per_user[split.users.at(r.user_id)];
    ++counts.per_item[split.items.at(r.item_id)];
  }
  return counts;
}

SegmentTag TrainCounts::segment(std::uint32_t user, std::uint32_t item, const WarmColdThresholds& t) const {
  const bool warm = per_user.at(user) >= t.min_user && per_item.at(item) >= t.min_item;
  return warm ? SegmentTag::warm : SegmentTag::cold;
}

std::vector<SegmentTag> partition_warm_cold(const SplitSet& split, const WarmColdThresholds& thresholds) {
  const auto counts = TrainCounts::from(split);
  std::vector<SegmentTag> tags;
  tags.reserve(split.test.size());
  for (const auto& r : split.test) {
    tags.push_back(counts.segment(split.users.at(r.user_id), split.items.at(r.item_id), thresholds));
  }
  return tags;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::string latin1_to_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out.push_back(ch);
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

ItemCatalog load_item_catalog(const fs::path& path, const CatalogSchema& schema, const WarningSink& warn) {
  if (schema.separator.empty()) throw ConfigError("catalog separator must not be empty");
  auto in = open_or_throw(path);
  const std::size_t needed = 1 + std::max(schema.item_column, schema.title_column);

  ItemCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.skip_header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, schema.separator);
    if (fields.size() < needed) {
      warn(where(path, line_no) + ": expected at least " + std::to_string(needed) + " fields; row skipped");
      continue;
    }
    const std::string id(trim(fields[schema.item_column]));
    std::string title(trim(fields[schema.title_column]));
    if (id.empty()) {
      warn(where(path, line_no) + ": empty item id; row skipped");
      continue;
    }
    if (title.empty()) {
      warn(where(path, line_no) + ": empty title for item " + id + "; row skipped");
      continue;
    }
    if (!is_valid_utf8(title)) title = latin1_to_utf8(title);
    const auto [it, inserted] = catalog.insert_or_assign(id, std::move(title));
    if (!inserted) {
      warn(where(path, line_no) + ": duplicate item id " + id + "; keeping the last occurrence");
    }
  }
  return catalog;
}

nlohmann::ordered_json write_split(const fs::path& dir, const SplitSet& split,
                                   const nlohmann::ordered_json& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["format"] = "binrec-split/1";
  manifest["source"] = provenance;
  manifest["n_users"] = split.users.size();
  manifest["n_items"] = split.items.size();
  nlohmann::ordered_json partitions = nlohmann::ordered_json::array();
  for (const auto p : {Partition::train, Partition::valid, Partition::test}) {
    const auto& rows = split.rows(p);
    const auto file = std::string(to_string(p)) + ".tsv";
    write_partition(dir / file, rows);
    std::size_t positives = 0;
    for (const auto& r : rows) positives += static_cast<std::size_t>(r.label);
    partitions.push_back({{"name", to_string(p)},
                          {"file", file},
                          {"rows", rows.size()},
                          {"positives", positives},
                          {"sha256", sha256_file_hex(dir / file)}});
  }
  manifest["partitions"] = std::move(partitions);

  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  return manifest;
}

SplitSet read_split(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  auto in = open_or_throw(manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  std::vector<LabeledInteraction> parts[3];
  try {
    for (const auto& entry : manifest.at("partitions")) {
      const auto p = parse_partition(entry.at("name").get<std::string>());
      const auto file = dir / entry.at("file").get<std::string>();
      if (sha256_file_hex(file) != entry.at("sha256").get<std::string>()) {
        throw DataError(file.string() + ": content does not match the manifest hash");
      }
      parts[static_cast<int>(p)] = read_partition(file);
      if (parts[static_cast<int>(p)].size() != entry.at("rows").get<std::size_t>()) {
        throw DataError(file.string() + ": row count does not match the manifest");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  return assemble_split(std::move(parts[0]), std::move(parts[1]), std::move(parts[2]));
}

}  // namespace binrec

#include "binrec/codec.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <regex>

#include "binrec/dataset.hpp"
#include "binrec/error.hpp"

namespace binrec {

std::string_view to_string(CodeFormat format) {
  return format == CodeFormat::binary ? "binary" : "dot_decimal";
}

CodeFormat parse_code_format(std::string_view name) {
  if (name == "binary") return CodeFormat::binary;
  if (name == "dot_decimal") return CodeFormat::dot_decimal;
  throw ConfigError("unknown code format: " + std::string(name) + " (expected binary or dot_decimal)");
}

CodeText code_to_binary_string(const BinaryCode& code) {
  std::string text(code.size(), '0');
  for (std::size_t j = 0; j < code.size(); ++j) {
    if (code[j]) text[j] = '1';
  }
  return {std::move(text), CodeFormat::binary};
}

BinaryCode parse_binary_string(std::string_view text) {
  if (text.empty()) throw DataError("empty binary code");
  BinaryCode code(text.size());
  for (std::size_t j = 0; j < text.size(); ++j) {
    if (text[j] != '0' && text[j] != '1') {
      throw DataError("invalid character '" + std::string(1, text[j]) + "' at position " + std::to_string(j) +
                      " of binary code");
    }
    code.set(j, text[j] == '1');
  }
  return code;
}

CodeText compress_dot_decimal(const CodeText& binary) {
  if (binary.format != CodeFormat::binary) throw DataError("compress_dot_decimal expects binary code text");
  const auto& s = binary.text;
  if (s.empty() || s.size() % 8 != 0) {
    throw DataError("binary code length " + std::to_string(s.size()) + " is not a positive multiple of 8");
  }
  std::string out;
  out.reserve(s.size() / 2);
  for (std::size_t g = 0; g < s.size(); g += 8) {
    unsigned value = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      const char c = s[g + k];
      if (c != '0' && c != '1') {
        throw DataError("invalid character '" + std::string(1, c) + "' at position " + std::to_string(g + k) +
                        " of binary code");
      }
      value = (value << 1) | static_cast<unsigned>(c - '0');
    }
    if (g != 0) out.push_back('.');
    char buf[4];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, res.ptr);
  }
  return {std::move(out), CodeFormat::dot_decimal};
}

CodeText decompress_dot_decimal(const CodeText& dotted) {
  if (dotted.format != CodeFormat::dot_decimal) throw DataError("decompress_dot_decimal expects dot-decimal text");
  std::string out;
  for (const auto group : split_fields(dotted.text, ".")) {
    if (group.empty()) throw DataError("empty group in dot-decimal code '" + dotted.text + "'");
    for (const char c : group) {
      if (c < '0' || c > '9') {
        throw DataError("non-digit '" + std::string(1, c) + "' in dot-decimal code '" + dotted.text + "'");
      }
    }
    if (group.size() > 1 && group.front() == '0') {
      throw DataError("non-canonical group '" + std::string(group) + "' in dot-decimal code '" + dotted.text + "'");
    }
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(group.data(), group.data() + group.size(), value);
    if (ec != std::errc() || value > 255) {
      throw DataError("group '" + std::string(group) + "' exceeds 255 in dot-decimal code '" + dotted.text + "'");
    }
    for (int bit = 7; bit >= 0; --bit) out.push_back(((value >> bit) & 1U) ? '1' : '0');
  }
  return {std::move(out), CodeFormat::binary};
}

CodeText render_code(const BinaryCode& code, CodeFormat format) {
  auto binary = code_to_binary_string(code);
  if (format == CodeFormat::binary) return binary;
  return compress_dot_decimal(binary);
}

BinaryCode parse_code(const CodeText& text) {
  if (text.format == CodeFormat::binary) return parse_binary_string(text.text);
  return parse_binary_string(decompress_dot_decimal(text).text);
}

bool contains_code_text(std::string_view text) {
  static const std::regex pattern(R"([01]{8,}|\b\d{1,3}(\.\d{1,3})+\b)");
  return std::regex_search(text.begin(), text.end(), pattern);
}

void write_code_dump(std::ostream& out, const CodeDump& dump) {
  out << "#binrec-codes\td=" << dump.dim << "\tformat=" << to_string(dump.format) << '\n';
  for (const auto& e : dump.entries) {
    if (e.code.format != dump.format) throw InvariantError("code dump entry format differs from header");
    out << to_string(e.kind) << '\t' << e.id << '\t' << e.code.text << '\n';
  }
}

CodeDump read_code_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open code dump: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty code dump");

  CodeDump dump;
  const auto header = split_fields(line, "\t");
  if (header.size() != 3 || header[0] != "#binrec-codes" || !header[1].starts_with("d=") ||
      !header[2].starts_with("format=")) {
    throw DataError(path.string() + ":1: malformed code dump header");
  }
  const auto d_text = header[1].substr(2);
  const auto [ptr, ec] = std::from_chars(d_text.data(), d_text.data() + d_text.size(), dump.dim);
  if (ec != std::errc() || ptr != d_text.data() + d_text.size() || dump.dim == 0) {
    throw DataError(path.string() + ":1: malformed code width");
  }
  try {
    dump.format = parse_code_format(header[2].substr(7));
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ":1: " + e.what());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_fields(line, "\t");
    if (fields.size() != 3 || fields[1].empty()) throw DataError(where + ": expected kind<TAB>id<TAB>code");
    CodeDumpEntry e;
    if (fields[0] == "user") {
      e.kind = EntityKind::user;
    } else if (fields[0] == "item") {
      e.kind = EntityKind::item;
    } else {
      throw DataError(where + ": unknown entity kind '" + std::string(fields[0]) + "'");
    }
    e.id = std::string(fields[1]);
    e.code = {std::string(fields[2]), dump.format};
    try {
      if (parse_code(e.code).size() != dump.dim) throw DataError("code width differs from header d");
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
    dump.entries.push_back(std::move(e));
  }
  return dump;
}

}  // namespace binrec

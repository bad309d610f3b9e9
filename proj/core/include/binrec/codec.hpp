#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "binrec/binary_code.hpp"
#include "binrec/collab.hpp"

namespace binrec {

enum class CodeFormat { binary, dot_decimal };

std::string_view to_string(CodeFormat format);
CodeFormat parse_code_format(std::string_view name);

// Rendered code text. binary: ^[01]+$; dot_decimal: canonical 0-255 groups joined by '.'.
struct CodeText {
  std::string text;
  CodeFormat format = CodeFormat::binary;

  friend bool operator==(const CodeText&, const CodeText&) = default;
};

/// One character per bit, in code order.
CodeText code_to_binary_string(const BinaryCode& code);

/// Inverse of code_to_binary_string. Throws DataError on an empty string or a non-0/1 character.
BinaryCode parse_binary_string(std::string_view text);

/// Each 8-bit group (most significant bit first) rendered as a decimal without
/// leading zeros, groups joined by '.'. Throws DataError unless the length is
/// a positive multiple of 8.
CodeText compress_dot_decimal(const CodeText& binary);

/// Each group back to exactly 8 bits. Throws DataError on an empty group, a
/// non-digit, a value above 255 or a non-canonical leading zero.
CodeText decompress_dot_decimal(const CodeText& dotted);

CodeText render_code(const BinaryCode& code, CodeFormat format);
BinaryCode parse_code(const CodeText& text);

/// True if the string contains a run of >= 8 binary digits or a dotted group
/// sequence of at least two 1-3 digit numbers.
bool contains_code_text(std::string_view text);

// --- code dump ------------------------------------------------------------------
// "#binrec-codes<TAB>d=<d><TAB>format=<fmt>" followed by "kind<TAB>id<TAB>code" lines.

struct CodeDumpEntry {
  EntityKind kind = EntityKind::user;
  std::string id;
  CodeText code;
};

struct CodeDump {
  std::size_t dim = 0;
  CodeFormat format = CodeFormat::binary;
  std::vector<CodeDumpEntry> entries;
};

void write_code_dump(std::ostream& out, const CodeDump& dump);
CodeDump read_code_dump(const std::filesystem::path& path);

}  // namespace binrec

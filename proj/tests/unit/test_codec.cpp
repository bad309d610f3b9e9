#include <random>
#include <sstream>

#include "binrec/codec.hpp"
#include "binrec/error.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace binrec;
using binrec::testing::bits_to_string;
using binrec::testing::random_bits;

namespace {

CodeText bin(std::string s) { return {std::move(s), CodeFormat::binary}; }
CodeText dotted(std::string s) { return {std::move(s), CodeFormat::dot_decimal}; }

}  // namespace

TEST_CASE("32-bit example compresses to an IPv4-style address") {
  const auto out = compress_dot_decimal(bin("10101100000100001111111000000001"));
  CHECK(out.text == "172.16.254.1");
  CHECK(out.format == CodeFormat::dot_decimal);
  CHECK(decompress_dot_decimal(out).text == "10101100000100001111111000000001");
}

TEST_CASE("group boundaries and leading zeros") {
  CHECK(compress_dot_decimal(bin("00000000")).text == "0");
  CHECK(compress_dot_decimal(bin("11111111")).text == "255");
  CHECK(compress_dot_decimal(bin("0000000100000000")).text == "1.0");
  CHECK(decompress_dot_decimal(dotted("0.255")).text == "0000000011111111");
}

TEST_CASE("compression agrees with positional arithmetic") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 8 * (1 + rng() % 64);
    const auto s = bits_to_string(random_bits(rng, d));
    REQUIRE(compress_dot_decimal(bin(s)).text == binrec::testing::positional_dot_decimal(s));
  }
}

TEST_CASE("round trips in both directions") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = 8 * (1 + rng() % 64);
    const auto s = bits_to_string(random_bits(rng, d));
    const auto c = compress_dot_decimal(bin(s));
    REQUIRE(decompress_dot_decimal(c).text == s);
    REQUIRE(compress_dot_decimal(decompress_dot_decimal(c)) == c);
  }
}

TEST_CASE("compress rejects lengths that are not a positive multiple of 8") {
  CHECK_THROWS_AS(compress_dot_decimal(bin("")), DataError);
  CHECK_THROWS_AS(compress_dot_decimal(bin("1010101")), DataError);
  CHECK_THROWS_AS(compress_dot_decimal(bin("101010101")), DataError);
  CHECK_THROWS_WITH_AS(compress_dot_decimal(bin(std::string(12, '1'))),
                       "binary code length 12 is not a positive multiple of 8", DataError);
  CHECK_THROWS_AS(compress_dot_decimal(bin("1010101x")), DataError);
}

TEST_CASE("decompress rejects malformed groups") {
  for (const char* bad : {"", "1..2", ".1", "1.", "256", "1.300", "01", "1.00", "a.1", "-1", "1.2.3.1000", " 1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(decompress_dot_decimal(dotted(bad)), DataError);
  }
}

TEST_CASE("binary string parsing") {
  const auto code = parse_binary_string("1001");
  CHECK(code.size() == 4);
  CHECK(code[0]);
  CHECK_FALSE(code[1]);
  CHECK(code[3]);
  CHECK(code_to_binary_string(code).text == "1001");
  CHECK_THROWS_AS(parse_binary_string(""), DataError);
  CHECK_THROWS_AS(parse_binary_string("10 1"), DataError);
}

TEST_CASE("render and parse codes") {
  const auto code = parse_binary_string("10101100000100001111111000000001");
  CHECK(render_code(code, CodeFormat::binary).text == "10101100000100001111111000000001");
  CHECK(render_code(code, CodeFormat::dot_decimal).text == "172.16.254.1");
  CHECK(parse_code(dotted("172.16.254.1")) == code);
  CHECK(parse_code(bin("10101100000100001111111000000001")) == code);
}

TEST_CASE("format names") {
  CHECK(parse_code_format("binary") == CodeFormat::binary);
  CHECK(parse_code_format("dot_decimal") == CodeFormat::dot_decimal);
  CHECK(to_string(CodeFormat::dot_decimal) == "dot_decimal");
  CHECK_THROWS_AS(parse_code_format("hex"), ConfigError);
}

TEST_CASE("code-text detector") {
  CHECK(contains_code_text("feature 10101100 here"));
  CHECK(contains_code_text("feature 172.16.254.1"));
  CHECK(contains_code_text("1.5"));
  CHECK_FALSE(contains_code_text("Toy Story (1995)"));
  CHECK_FALSE(contains_code_text("1010101"));
  CHECK_FALSE(contains_code_text("Apollo 13"));
}

TEST_CASE("code dump round trip") {
  binrec::testing::TempDir dir;
  CodeDump dump;
  dump.dim = 16;
  dump.format = CodeFormat::dot_decimal;
  dump.entries.push_back({EntityKind::user, "u1", dotted("1.2")});
  dump.entries.push_back({EntityKind::item, "i 9", dotted("255.0")});
  {
    std::ofstream out(dir / "codes.tsv");
    write_code_dump(out, dump);
  }
  const auto text = binrec::testing::read_text(dir / "codes.tsv");
  CHECK(text.rfind("#binrec-codes\td=16\tformat=dot_decimal\n", 0) == 0);

  const auto back = read_code_dump(dir / "codes.tsv");
  CHECK(back.dim == 16);
  CHECK(back.format == CodeFormat::dot_decimal);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].kind == EntityKind::item);
  CHECK(back.entries[1].id == "i 9");
  CHECK(back.entries[1].code.text == "255.0");
}

TEST_CASE("code dump validation") {
  binrec::testing::TempDir dir;
  binrec::testing::write_text(dir / "bad_header.tsv", "codes\n");
  CHECK_THROWS_AS(read_code_dump(dir / "bad_header.tsv"), DataError);
  binrec::testing::write_text(dir / "bad_width.tsv", "#binrec-codes\td=8\tformat=binary\nuser\tu\t1010\n");
  CHECK_THROWS_AS(read_code_dump(dir / "bad_width.tsv"), DataError);
  CHECK_THROWS_AS(read_code_dump(dir / "missing.tsv"), DataError);
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace binrec {

// A fixed-width {0,1} code. Bit 0 is the first character of the rendered
// text form; storage is packed into 64-bit words.
class BinaryCode {
 public:
  BinaryCode() = default;
  explicit BinaryCode(std::size_t width);

  /// Builds a code from a sequence of 0/1 values; throws DataError on anything else.
  static BinaryCode from_bits(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return width_; }
  bool empty() const noexcept { return width_ == 0; }

  bool operator[](std::size_t pos) const noexcept {
    return (words_[pos / 64] >> (pos % 64)) & 1U;
  }
  void set(std::size_t pos, bool value) noexcept;

  std::size_t popcount() const noexcept;
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::vector<std::uint8_t> to_bits() const;

  friend bool operator==(const BinaryCode&, const BinaryCode&) = default;

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

// All pairwise operations throw std::invalid_argument on a width mismatch.
std::size_t hamming_distance(const BinaryCode& a, const BinaryCode& b);
std::size_t and_popcount(const BinaryCode& a, const BinaryCode& b);

// Inner product of the ±1 images (0 -> -1, 1 -> +1) of two codes.
long signed_dot(const BinaryCode& a, const BinaryCode& b);

}  // namespace binrec

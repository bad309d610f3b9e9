#include "binrec/binary_code.hpp"

#include <bit>
#include <stdexcept>
#include <string>

#include "binrec/error.hpp"

namespace binrec {

namespace {

void require_same_width(const BinaryCode& a, const BinaryCode& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("code width mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

}  // namespace

BinaryCode::BinaryCode(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

BinaryCode BinaryCode::from_bits(std::span<const std::uint8_t> bits) {
  BinaryCode code(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] > 1) {
      throw DataError("bit " + std::to_string(j) + " is not 0 or 1");
    }
    code.set(j, bits[j] == 1);
  }
  return code;
}

void BinaryCode::set(std::size_t pos, bool value) noexcept {
  const std::uint64_t mask = std::uint64_t{1} << (pos % 64);
  if (value) {
    words_[pos / 64] |= mask;
  } else {
    words_[pos / 64] &= ~mask;
  }
}

std::size_t BinaryCode::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint8_t> BinaryCode::to_bits() const {
  std::vector<std::uint8_t> bits(width_);
  for (std::size_t j = 0; j < width_; ++j) bits[j] = (*this)[j] ? 1 : 0;
  return bits;
}

std::size_t hamming_distance(const BinaryCode& a, const BinaryCode& b) {
  require_same_width(a, b);
  std::size_t n = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) n += static_cast<std::size_t>(std::popcount(wa[k] ^ wb[k]));
  return n;
}

std::size_t and_popcount(const BinaryCode& a, const BinaryCode& b) {
  require_same_width(a, b);
  std::size_t n = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t k = 0; k < wa.size(); ++k) n += static_cast<std::size_t>(std::popcount(wa[k] & wb[k]));
  return n;
}

long signed_dot(const BinaryCode& a, const BinaryCode& b) {
  return static_cast<long>(a.size()) - 2 * static_cast<long>(hamming_distance(a, b));
}

}  // namespace binrec

#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library paths they check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace binrec::testing {

/// O(n^2) AUC over all positive/negative pairs; a tie earns half credit.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::uint64_t twice_wins = 0, pos = 0, neg = 0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (labels[a] == 1) ++pos; else ++neg;
  }
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (labels[a] != 1) continue;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      if (labels[b] != 0) continue;
      if (scores[a] > scores[b]) twice_wins += 2;
      else if (scores[a] == scores[b]) twice_wins += 1;
    }
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// Inner product of the ±1 images of two bit vectors, bit by bit.
inline long pm1_dot(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
  long s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] ? 1 : -1) * (y[j] ? 1 : -1);
  return s;
}

inline std::size_t naive_hamming(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < x.size(); ++j) n += x[j] != y[j];
  return n;
}

inline std::size_t naive_and(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < x.size(); ++j) n += (x[j] && y[j]) ? 1 : 0;
  return n;
}

inline std::size_t naive_popcount(const std::vector<std::uint8_t>& x) {
  std::size_t n = 0;
  for (auto b : x) n += b;
  return n;
}

/// Dot-decimal rendering by positional arithmetic: group value = sum bit_k * 2^(7-k).
inline std::string positional_dot_decimal(const std::string& bits) {
  std::string out;
  for (std::size_t g = 0; g < bits.size(); g += 8) {
    long value = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      value += (bits[g + k] == '1' ? 1L : 0L) * std::lround(std::pow(2.0, 7.0 - static_cast<double>(k)));
    }
    if (g) out += '.';
    out += std::to_string(value);
  }
  return out;
}

inline std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t d) {
  std::bernoulli_distribution coin(0.5);
  std::vector<std::uint8_t> bits(d);
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  return bits;
}

inline std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
  std::string s;
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

}  // namespace binrec::testing

#include "binrec/checkpoint.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "binrec/error.hpp"

namespace binrec {

namespace {

static_assert(std::numeric_limits<float>::is_iec559, "checkpoints assume IEEE-754 float32");

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                  static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), bytes.size());
}

void put_f32(std::ostream& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

template <typename M>
void put_array(std::ostream& out, const M& m) {
  // Row-major matrices and vectors both store their data in the on-disk order.
  for (Eigen::Index k = 0; k < m.size(); ++k) put_f32(out, m.data()[k]);
}

class Reader {
 public:
  Reader(std::istream& in, std::filesystem::path path) : in_(in), path_(std::move(path)) {}

  std::uint32_t u32() {
    std::array<unsigned char, 4> b{};
    if (!in_.read(reinterpret_cast<char*>(b.data()), b.size())) {
      throw DataError(path_.string() + ": truncated checkpoint");
    }
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
  }

  double f32() {
    const float v = std::bit_cast<float>(u32());
    if (!std::isfinite(v)) throw DataError(path_.string() + ": checkpoint contains a non-finite value");
    return v;
  }

  template <typename M>
  void fill(M& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = f32();
  }

 private:
  std::istream& in_;
  std::filesystem::path path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  if (ckpt.head.dim() != m.dim() || static_cast<std::size_t>(m.item_table.cols()) != m.dim()) {
    throw InvariantError("checkpoint tables disagree on the embedding width");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(m.n_users()));
  put_u32(out, static_cast<std::uint32_t>(m.n_items()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  put_f32(out, ckpt.temperature);
  put_array(out, m.user_table);
  put_array(out, m.item_table);
  put_array(out, ckpt.head.weight);
  put_array(out, ckpt.head.bias);
  if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[4] = {};
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw DataError(path.string() + ": not a binrec checkpoint");
  }
  Reader r(in, path);
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto n_users = r.u32();
  const auto n_items = r.u32();
  const auto d = r.u32();
  if (n_users == 0 || n_items == 0 || d == 0) throw DataError(path.string() + ": empty checkpoint dimensions");

  Checkpoint ckpt;
  ckpt.temperature = r.f32();
  ckpt.model.user_table.resize(n_users, d);
  ckpt.model.item_table.resize(n_items, d);
  ckpt.head.weight.resize(d, d);
  ckpt.head.bias.resize(d);
  r.fill(ckpt.model.user_table);
  r.fill(ckpt.model.item_table);
  r.fill(ckpt.head.weight);
  r.fill(ckpt.head.bias);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after checkpoint payload");
  }
  return ckpt;
}

Checkpoint quantize_to_float(Checkpoint ckpt) {
  const auto round = [](auto& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(m.data()[k]);
  };
  round(ckpt.model.user_table);
  round(ckpt.model.item_table);
  round(ckpt.head.weight);
  round(ckpt.head.bias);
  ckpt.temperature = static_cast<float>(ckpt.temperature);
  return ckpt;
}

}  // namespace binrec

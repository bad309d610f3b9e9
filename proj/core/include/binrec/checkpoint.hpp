#pragma once

#include <cstdint>
#include <filesystem>

#include "binrec/collab.hpp"

namespace binrec {

// Binary layout, all fields little-endian:
//   char[4]  magic "BRCK"
//   u32      version (1)
//   u32      n_users, n_items, d
//   f32      temperature
//   f32[]    user_table (n_users x d, row-major), item_table (n_items x d),
//            W (d x d, row-major), b (d)
inline constexpr char kCheckpointMagic[4] = {'B', 'R', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  CollabModel model;
  BinarizationHead head;
  double temperature = 1.0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws DataError on a missing, truncated or foreign file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rounds every parameter through float32, giving exactly what a save/load
/// round trip would produce.
Checkpoint quantize_to_float(Checkpoint ckpt);

}  // namespace binrec

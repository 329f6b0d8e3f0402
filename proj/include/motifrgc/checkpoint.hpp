#pragma once

// Binary checkpoint:
//   8 bytes   magic "MOTIFRGC"
//   u32       format version
//   u64       header length L
//   L bytes   JSON header (run config, seed, training summary, block table)
//   payload   raw little-endian doubles of every block, column-major, in
//             block-table order

#include <cstdint>
#include <filesystem>

#include "motifrgc/config.hpp"
#include "motifrgc/train.hpp"

namespace motifrgc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelState model;
  RunConfig config;
  std::uint64_t seed = 0;
  double best_valid_auc = 0.0;
  int best_iteration = 0;
};

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& file);

/// FNV-1a over the bytes of a file.
std::uint64_t file_hash(const std::filesystem::path& file);

}  // namespace motifrgc

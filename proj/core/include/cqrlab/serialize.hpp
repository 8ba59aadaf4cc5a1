#pragma once

// Line-oriented file formats. Line 1 is a JSON header object; every further
// line is one JSON record. Doubles are written in shortest round-trip form,
// so save/load is bit-exact.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cqrlab/nn.hpp"
#include "cqrlab/replay.hpp"

namespace cqrlab {

inline constexpr int kSchemaMajor = 1;

void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path);

/// Throws FormatError naming the 1-based record on malformed or truncated
/// input, and on an unknown schema major version.
OfflineDataset load_dataset(const std::filesystem::path& path);

struct CheckpointMeta {
  std::string algo;
  int num_quantiles = 1;
  std::uint64_t config_hash = 0;
  int obs_dim = 0;
  int action_count = 0;

  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  nn::Mlp net;
  CheckpointMeta meta;
};

void save_checkpoint(const nn::Mlp& net, const CheckpointMeta& meta, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws MismatchError when the checkpoint cannot drive a run configured as
/// `expected` (algorithm family, quantile count, dims). A config-hash
/// difference is not fatal; it is returned as a warning naming both hashes.
std::vector<std::string> check_checkpoint_compatible(const CheckpointMeta& loaded,
                                                     const CheckpointMeta& expected);

std::string hash_hex(std::uint64_t h);

}  // namespace cqrlab

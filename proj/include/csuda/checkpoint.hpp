#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "csuda/network.hpp"

namespace csuda {

struct CheckpointMeta {
  int epochs = 0;
  std::uint64_t seed = 0;
  double source_test_accuracy = -1.0;  // < 0 when not recorded
};

/// Single-file model archive: 8-byte magic, little-endian u64 header length,
/// JSON header (schema, architecture id, shape, metadata, tensor directory),
/// then raw little-endian float32 blobs named by stable parameter paths.
/// Round-trip reproduces evaluation-mode outputs bit-exactly.
void save_checkpoint(const std::filesystem::path& path, Network<float>& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Network<float> model;
  CheckpointMeta meta;
  std::string arch_id;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace csuda

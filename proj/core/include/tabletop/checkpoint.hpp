#pragma once

// Checkpoint file layout:
//   bytes 0..7   magic "TTOPNET1"
//   bytes 8..11  header length N, little-endian uint32
//   next N bytes UTF-8 JSON header (architecture, parameter table, metadata)
//   remainder    parameters as little-endian IEEE-754 f32, concatenated in
//                header order

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabletop/network.hpp"
#include "tabletop/train_config.hpp"

namespace tabletop {

inline constexpr std::string_view kCheckpointMagic = "TTOPNET1";

struct CheckpointMetadata {
  std::size_t epoch = 0;  // 1-based epoch the weights come from; 0 = untrained
  double val_accuracy = 0.0;
  std::uint64_t seed = 0;
  TrainConfig config;
  /// "recognition" or "angle"; empty when unknown.
  std::string task;
  /// Object an angle model was trained for; empty for recognition.
  std::string object;
  /// Number of 2x box-downsampling passes applied to archive images before
  /// they reach the network.
  std::size_t halvings = 0;

  bool operator==(const CheckpointMetadata&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;
  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  NetworkSpec spec;
  std::vector<NamedTensor> parameters;
  CheckpointMetadata metadata;

  static Checkpoint capture(const Network<float>& net, CheckpointMetadata metadata);
  /// Builds a network with the stored spec and weights; throws CheckpointError
  /// (shape_mismatch) when the parameter table disagrees with the spec.
  Network<float> restore() const;

  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tabletop

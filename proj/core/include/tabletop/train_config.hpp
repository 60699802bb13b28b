#pragma once

#include <cstddef>
#include <cstdint>

#include "tabletop/tensor.hpp"

namespace tabletop {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  /// Training always runs in f32; f64 exists for gradient checks only.
  Precision precision = Precision::f32;

  /// Throws ValidationError when any field is outside its documented range.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

}  // namespace tabletop

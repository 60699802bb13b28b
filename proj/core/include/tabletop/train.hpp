#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "tabletop/checkpoint.hpp"
#include "tabletop/network.hpp"
#include "tabletop/train_config.hpp"

namespace tabletop {

struct Example {
  Tensor image;  // [1,h,w]
  std::size_t label = 0;
};

/// RMSProp running mean squares, one tensor per parameter.
struct OptimizerState {
  std::vector<Tensor> mean_square;

  static OptimizerState for_parameters(std::span<Parameter<float>* const> params);
};

/// r ← ρ·r + (1−ρ)·g²;  θ ← θ − lr·g / (√r + ε), elementwise.
/// Throws NumericError naming the parameter if any gradient is non-finite.
void rmsprop_step(std::span<Parameter<float>* const> params, OptimizerState& state, const TrainConfig& config);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Stratified split: within each stratum (e.g. object*8 + angle) a seeded
/// round(n·fraction) entries, clamped to [1, n−1], go to validation. Both
/// outputs are sorted. Throws ValidationError if a stratum has fewer than 2
/// members.
SplitIndices split_train_val(std::span<const std::size_t> strata, double val_fraction, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over batches of per-sample mean cross-entropy
  double train_acc = 0.0;   // running accuracy in train mode during the epoch
  double val_acc = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> history;
};

/// Called after each epoch; returning false stops training early.
using EpochObserver = std::function<bool(const EpochRecord&, Network<float>&)>;

/// Mini-batch RMSProp. Each epoch shuffles with a seed derived from
/// config.seed, then measures validation accuracy; the checkpoint with the
/// highest validation accuracy is kept (ties keep the earlier epoch). On
/// return `net` holds the last epoch's weights, not necessarily the best.
TrainResult train(Network<float>& net, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config, CheckpointMetadata metadata = {}, const EpochObserver& observer = {});

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

EvalResult confusion_from_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                      std::size_t classes);
/// Eval-mode accuracy and confusion matrix.
EvalResult evaluate(Network<float>& net, std::span<const Example> samples);

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace tabletop

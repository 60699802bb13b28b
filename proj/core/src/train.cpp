#include "tabletop/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

namespace tabletop {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be >= 0");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw ValidationError("rmsprop_decay must be in (0,1)");
  if (!(rmsprop_epsilon > 0.0)) throw ValidationError("rmsprop_epsilon must be > 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in (0,1)");
  if (precision != Precision::f32) throw ValidationError("training runs in f32; f64 is reserved for gradient checks");
}

OptimizerState OptimizerState::for_parameters(std::span<Parameter<float>* const> params) {
  OptimizerState s;
  for (const auto* p : params) s.mean_square.emplace_back(p->value.shape());
  return s;
}

void rmsprop_step(std::span<Parameter<float>* const> params, OptimizerState& state, const TrainConfig& config) {
  if (state.mean_square.size() != params.size()) throw DimensionError("optimizer state does not match parameters");
  const auto rho = static_cast<float>(config.rmsprop_decay);
  const auto one_minus_rho = static_cast<float>(1.0 - config.rmsprop_decay);
  const auto lr = static_cast<float>(config.learning_rate);
  const auto eps = static_cast<float>(config.rmsprop_epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& r = state.mean_square[k];
    if (r.shape() != p.value.shape() || p.grad.shape() != p.value.shape()) {
      throw DimensionError("optimizer state shape mismatch for " + p.name);
    }
    if (!all_finite(p.grad)) throw NumericError("non-finite gradient in parameter " + p.name);
    auto theta = p.value.data();
    auto g = p.grad.data();
    auto ms = r.data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      ms[i] = rho * ms[i] + one_minus_rho * g[i] * g[i];
      theta[i] -= lr * g[i] / (std::sqrt(ms[i]) + eps);
    }
  }
}

SplitIndices split_train_val(std::span<const std::size_t> strata, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in (0,1)");
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
  SplitIndices out;
  for (auto& [key, members] : groups) {
    const std::size_t n = members.size();
    if (n < 2) {
      throw ValidationError("stratum " + std::to_string(key) + " has " + std::to_string(n) +
                            " sample(s); at least 2 are needed for a train/val split");
    }
    const auto want = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
    const std::size_t n_val = std::clamp<std::size_t>(want, 1, n - 1);
    Rng rng(Rng::derive(seed, key));
    rng.shuffle(members);
    out.val.insert(out.val.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

EvalResult confusion_from_predictions(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                      std::size_t classes) {
  if (truth.size() != predicted.size()) throw DimensionError("truth and prediction counts differ");
  EvalResult r;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes) throw ValidationError("label out of range in evaluation");
    ++r.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++r.correct;
  }
  r.total = truth.size();
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

EvalResult evaluate(Network<float>& net, std::span<const Example> samples) {
  std::vector<std::size_t> truth, pred;
  truth.reserve(samples.size());
  pred.reserve(samples.size());
  for (const auto& s : samples) {
    truth.push_back(s.label);
    pred.push_back(net.predict(s.image));
  }
  return confusion_from_predictions(truth, pred, net.spec().classes);
}

TrainResult train(Network<float>& net, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config, CheckpointMetadata metadata, const EpochObserver& observer) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  if (val_set.empty()) throw ValidationError("validation set is empty");
  const std::size_t classes = net.spec().classes;
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& e : *set) {
      if (e.label >= classes) {
        throw ValidationError("label " + std::to_string(e.label) + " exceeds network output width " +
                              std::to_string(classes));
      }
    }
  }

  metadata.seed = config.seed;
  metadata.config = config;
  net.reseed_dropout(Rng::derive(config.seed, 0xD0));
  auto params = net.parameters();
  auto opt = OptimizerState::for_parameters(params);

  TrainResult result;
  bool have_best = false;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(config.seed, epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0;
    for (std::size_t start = 0, batch = 1; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      net.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train_set[order[k]];
        const auto r = softmax_xent(net.forward(ex.image, Mode::train), ex.label);
        if (!std::isfinite(r.loss)) {
          throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch));
        }
        batch_loss += r.loss;
        const auto predicted =
            static_cast<std::size_t>(std::max_element(r.probs.data().begin(), r.probs.data().end()) -
                                     r.probs.data().begin());
        if (predicted == ex.label) ++correct;
        net.backward(r.dlogits);
      }
      const auto n = static_cast<float>(end - start);
      for (auto* p : params) scale_inplace(p->grad, 1.0f / n);
      try {
        rmsprop_step(params, opt, config);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch));
      }
      loss_sum += batch_loss / static_cast<double>(end - start);
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    rec.val_acc = evaluate(net, val_set).accuracy;
    result.history.push_back(rec);

    if (!have_best || rec.val_acc > result.best.metadata.val_accuracy) {
      metadata.epoch = epoch;
      metadata.val_accuracy = rec.val_acc;
      result.best = Checkpoint::capture(net, metadata);
      have_best = true;
    }
    if (observer && !observer(rec, net)) break;
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_loss,train_acc,val_acc\n";
  char line[128];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss, r.train_acc, r.val_acc);
    out << line;
  }
}

}  // namespace tabletop

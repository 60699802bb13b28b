#pragma once

// Layer zoo with explicit forward/backward passes. Each layer processes one
// sample; backward() accumulates parameter gradients (callers zero them per
// batch) and returns the gradient with respect to the layer input.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabletop/rng.hpp"
#include "tabletop/tensor.hpp"

namespace tabletop {

enum class Mode { train, eval };

enum class LayerKind { conv2d, maxpool2, dense, relu, dropout, flatten };
enum class Padding { same, valid };

const char* to_string(LayerKind kind) noexcept;
LayerKind parse_layer_kind(const std::string& text);
const char* to_string(Padding padding) noexcept;
Padding parse_padding(const std::string& text);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  // conv2d
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  Padding padding = Padding::same;
  // dense
  std::size_t out_units = 0;
  // dropout
  double rate = 0.0;

  static LayerSpec conv2d(std::size_t out_channels, std::size_t kernel, Padding padding = Padding::same);
  static LayerSpec maxpool2() { return {.kind = LayerKind::maxpool2}; }
  static LayerSpec dense(std::size_t out_units) { return {.kind = LayerKind::dense, .out_units = out_units}; }
  static LayerSpec relu() { return {.kind = LayerKind::relu}; }
  static LayerSpec dropout(double rate) { return {.kind = LayerKind::dropout, .rate = rate}; }
  static LayerSpec flatten() { return {.kind = LayerKind::flatten}; }

  /// Throws ValidationError on even "same" kernels, stride != 1 or rate outside [0,1).
  void validate() const;
  /// Output shape for a given input shape; throws DimensionError if the input
  /// cannot pass through this layer.
  Shape output_shape(const Shape& input) const;

  bool operator==(const LayerSpec&) const = default;
};

template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
};

template <typename T>
class Layer {
public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) = 0;
  /// Requires a preceding train-mode forward(). When want_input_grad is false
  /// the returned tensor is empty (used for the first layer of a network).
  virtual BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) = 0;

  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  virtual bool has_cache() const = 0;
  virtual void clear_cache() = 0;
  /// Hash of the piecewise-linear branch taken in the last train forward (ReLU
  /// masks, pooling argmax). Zero for smooth layers.
  virtual std::uint64_t branch_signature() const { return 0; }
};

template <typename T>
class Conv2d final : public Layer<T> {
public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, Padding padding);

  LayerKind kind() const override { return LayerKind::conv2d; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  bool has_cache() const override { return cols_.has_value(); }
  void clear_cache() override { cols_.reset(); }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  std::size_t pad() const { return padding_ == Padding::same ? kernel_ / 2 : 0; }

private:
  std::size_t in_channels_, out_channels_, kernel_;
  Padding padding_;
  Parameter<T> weight_;  // [out_c, in_c, k, k]
  Parameter<T> bias_;    // [out_c]
  std::optional<BasicTensor<T>> cols_;
  ConvGeometry geom_{};
};

/// 2x2 window, stride 2; odd trailing row/column dropped.
template <typename T>
class MaxPool2 final : public Layer<T> {
public:
  LayerKind kind() const override { return LayerKind::maxpool2; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  bool has_cache() const override { return !argmax_.empty(); }
  void clear_cache() override { argmax_.clear(); }
  std::uint64_t branch_signature() const override;

private:
  Shape input_shape_;
  std::vector<std::size_t> argmax_;  // flat input index per output cell
};

template <typename T>
class Dense final : public Layer<T> {
public:
  Dense(std::size_t in_units, std::size_t out_units);

  LayerKind kind() const override { return LayerKind::dense; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  bool has_cache() const override { return input_.has_value(); }
  void clear_cache() override { input_.reset(); }

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

private:
  std::size_t in_units_, out_units_;
  Parameter<T> weight_;  // [in, out]
  Parameter<T> bias_;    // [out]
  std::optional<BasicTensor<T>> input_;
};

template <typename T>
class Relu final : public Layer<T> {
public:
  LayerKind kind() const override { return LayerKind::relu; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  bool has_cache() const override { return has_mask_; }
  void clear_cache() override {
    mask_.clear();
    has_mask_ = false;
  }
  std::uint64_t branch_signature() const override;

private:
  std::vector<unsigned char> mask_;
  Shape shape_;
  bool has_mask_ = false;
};

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate). Identity in eval mode or
/// when deactivated.
template <typename T>
class Dropout final : public Layer<T> {
public:
  Dropout(double rate, std::uint64_t seed);

  LayerKind kind() const override { return LayerKind::dropout; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  bool has_cache() const override { return has_mask_; }
  void clear_cache() override {
    mask_.clear();
    has_mask_ = false;
  }

  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }
  void set_active(bool active) { active_ = active; }
  double rate() const { return rate_; }

private:
  double rate_;
  Rng rng_;
  bool active_ = true;
  std::vector<T> mask_;  // 0 or 1/(1-rate)
  bool has_mask_ = false;
};

template <typename T>
class Flatten final : public Layer<T> {
public:
  LayerKind kind() const override { return LayerKind::flatten; }
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode) override;
  BasicTensor<T> backward(const BasicTensor<T>& upstream, bool want_input_grad = true) override;
  bool has_cache() const override { return !shape_.empty(); }
  void clear_cache() override { shape_.clear(); }

private:
  Shape shape_;
};

/// Numerically stable softmax (max subtracted before exponentiation).
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

template <typename T>
struct SoftmaxXent {
  double loss = 0.0;
  BasicTensor<T> probs;
  BasicTensor<T> dlogits;  // probs - onehot(label)
};

/// Softmax followed by categorical cross-entropy against a class index.
template <typename T>
SoftmaxXent<T> softmax_xent(const BasicTensor<T>& logits, std::size_t label);

/// He-uniform initialization: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T>
void he_uniform(BasicTensor<T>& w, std::size_t fan_in, Rng& rng);

}  // namespace tabletop

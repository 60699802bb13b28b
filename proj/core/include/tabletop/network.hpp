#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tabletop/layers.hpp"

namespace tabletop {

/// Declarative architecture: input shape, ordered layers, class count. The
/// final layer's width must equal `classes`; softmax is applied by the loss.
struct NetworkSpec {
  std::string name;
  Shape input;  // [1, h, w]
  std::vector<LayerSpec> layers;
  std::size_t classes = 0;

  /// Shapes after each layer (element 0 is the input). Throws DimensionError
  /// if the chain breaks or the output width differs from `classes`.
  std::vector<Shape> shape_chain() const;
  void validate() const { (void)shape_chain(); }
  std::size_t parameter_count() const;

  /// JSON text round trip (stable key order).
  std::string to_json() const;
  static NetworkSpec from_json(const std::string& text);

  bool operator==(const NetworkSpec&) const = default;
};

template <typename T>
class Network {
public:
  /// Builds layers and He-uniform initializes weights from `seed`. Biases start at 0.
  explicit Network(NetworkSpec spec, std::uint64_t seed = 0);

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const NetworkSpec& spec() const { return spec_; }

  /// Returns logits.
  BasicTensor<T> forward(const BasicTensor<T>& x, Mode mode);
  /// Backpropagates dlogits through every layer, accumulating parameter gradients.
  void backward(const BasicTensor<T>& dlogits);
  BasicTensor<T> predict_probs(const BasicTensor<T>& x);
  std::size_t predict(const BasicTensor<T>& x);

  /// Outputs of every layer for one eval-mode pass (element i = output of layer i).
  std::vector<BasicTensor<T>> trace(const BasicTensor<T>& x);

  /// Parameters in stable order; names are "<layer index>_<kind>.<weight|bias>".
  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  void zero_grad();

  void set_dropout_active(bool active);
  void reseed_dropout(std::uint64_t seed);
  /// Combined ReLU/pool branch hash of the last train-mode forward.
  std::uint64_t branch_signature() const;

  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  std::size_t layer_count() const { return layers_.size(); }

private:
  NetworkSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Copies parameter values between networks (possibly of different precision)
/// with identical specs.
template <typename From, typename To>
void copy_parameters(const Network<From>& from, Network<To>& to);

}  // namespace tabletop

#include "tabletop/network.hpp"

#include "spec_json.hpp"

namespace tabletop {

std::vector<Shape> NetworkSpec::shape_chain() const {
  if (input.size() != 3) throw DimensionError("network input must be [channels, h, w], got " + shape_string(input));
  std::vector<Shape> chain{input};
  for (std::size_t i = 0; i < layers.size(); ++i) {
    try {
      chain.push_back(layers[i].output_shape(chain.back()));
    } catch (const DimensionError& e) {
      throw DimensionError(name + ": layer " + std::to_string(i) + " (" + to_string(layers[i].kind) +
                           "): " + e.what());
    }
  }
  if (chain.back() != Shape{classes}) {
    throw DimensionError(name + ": network output " + shape_string(chain.back()) + " does not match " +
                         std::to_string(classes) + " classes");
  }
  return chain;
}

std::size_t NetworkSpec::parameter_count() const {
  const auto chain = shape_chain();
  std::size_t n = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const auto& in = chain[i];
    if (l.kind == LayerKind::conv2d) n += l.out_channels * in[0] * l.kernel * l.kernel + l.out_channels;
    if (l.kind == LayerKind::dense) n += in[0] * l.out_units + l.out_units;
  }
  return n;
}

namespace detail {

nlohmann::json spec_to_json(const NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    nlohmann::json j{{"kind", to_string(l.kind)}};
    switch (l.kind) {
      case LayerKind::conv2d:
        j["out_channels"] = l.out_channels;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        j["padding"] = to_string(l.padding);
        break;
      case LayerKind::dense: j["out_units"] = l.out_units; break;
      case LayerKind::dropout: j["rate"] = l.rate; break;
      default: break;
    }
    layers.push_back(std::move(j));
  }
  return {{"name", spec.name}, {"input", spec.input}, {"layers", layers}, {"classes", spec.classes}};
}

NetworkSpec spec_from_json(const nlohmann::json& j) {
  try {
    NetworkSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.input = j.at("input").get<Shape>();
    spec.classes = j.at("classes").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.kind = parse_layer_kind(lj.at("kind").get<std::string>());
      switch (l.kind) {
        case LayerKind::conv2d:
          l.out_channels = lj.at("out_channels").get<std::size_t>();
          l.kernel = lj.at("kernel").get<std::size_t>();
          l.stride = lj.value("stride", std::size_t{1});
          l.padding = parse_padding(lj.value("padding", std::string("same")));
          break;
        case LayerKind::dense: l.out_units = lj.at("out_units").get<std::size_t>(); break;
        case LayerKind::dropout: l.rate = lj.at("rate").get<double>(); break;
        default: break;
      }
      spec.layers.push_back(l);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid network spec: ") + e.what());
  }
}

}  // namespace detail

std::string NetworkSpec::to_json() const { return detail::spec_to_json(*this).dump(); }

NetworkSpec NetworkSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid network spec JSON: ") + e.what());
  }
  return detail::spec_from_json(j);
}

template <typename T>
Network<T>::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  const auto chain = spec_.shape_chain();
  Rng rng(seed);
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    const auto& in = chain[i];
    const std::string prefix = std::to_string(i) + "_" + to_string(l.kind) + ".";
    switch (l.kind) {
      case LayerKind::conv2d: {
        auto conv = std::make_unique<Conv2d<T>>(in[0], l.out_channels, l.kernel, l.padding);
        conv->weight().name = prefix + "weight";
        conv->bias().name = prefix + "bias";
        he_uniform(conv->weight().value, in[0] * l.kernel * l.kernel, rng);
        layers_.push_back(std::move(conv));
        break;
      }
      case LayerKind::dense: {
        auto dense = std::make_unique<Dense<T>>(in[0], l.out_units);
        dense->weight().name = prefix + "weight";
        dense->bias().name = prefix + "bias";
        he_uniform(dense->weight().value, in[0], rng);
        layers_.push_back(std::move(dense));
        break;
      }
      case LayerKind::maxpool2: layers_.push_back(std::make_unique<MaxPool2<T>>()); break;
      case LayerKind::relu: layers_.push_back(std::make_unique<Relu<T>>()); break;
      case LayerKind::flatten: layers_.push_back(std::make_unique<Flatten<T>>()); break;
      case LayerKind::dropout:
        layers_.push_back(std::make_unique<Dropout<T>>(l.rate, Rng::derive(seed, 1000 + i)));
        break;
    }
  }
}

template <typename T>
BasicTensor<T> Network<T>::forward(const BasicTensor<T>& x, Mode mode) {
  if (x.shape() != spec_.input) {
    throw DimensionError(spec_.name + ": input " + shape_string(x.shape()) + " does not match " +
                         shape_string(spec_.input));
  }
  BasicTensor<T> a = x;
  for (auto& l : layers_) a = l->forward(a, mode);
  return a;
}

template <typename T>
void Network<T>::backward(const BasicTensor<T>& dlogits) {
  BasicTensor<T> g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, i > 0);
}

template <typename T>
BasicTensor<T> Network<T>::predict_probs(const BasicTensor<T>& x) {
  return softmax(forward(x, Mode::eval));
}

template <typename T>
std::size_t Network<T>::predict(const BasicTensor<T>& x) {
  const auto logits = forward(x, Mode::eval);
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;
  return best;
}

template <typename T>
std::vector<BasicTensor<T>> Network<T>::trace(const BasicTensor<T>& x) {
  if (x.shape() != spec_.input) {
    throw DimensionError(spec_.name + ": input " + shape_string(x.shape()) + " does not match " +
                         shape_string(spec_.input));
  }
  std::vector<BasicTensor<T>> outs;
  outs.reserve(layers_.size());
  BasicTensor<T> a = x;
  for (auto& l : layers_) {
    a = l->forward(a, Mode::eval);
    outs.push_back(a);
  }
  return outs;
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Network<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(T{0});
}

template <typename T>
void Network<T>::set_dropout_active(bool active) {
  for (auto& l : layers_)
    if (auto* d = dynamic_cast<Dropout<T>*>(l.get())) d->set_active(active);
}

template <typename T>
void Network<T>::reseed_dropout(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (auto* d = dynamic_cast<Dropout<T>*>(layers_[i].get())) d->reseed(Rng::derive(seed, 1000 + i));
}

template <typename T>
std::uint64_t Network<T>::branch_signature() const {
  std::uint64_t h = 0;
  for (const auto& l : layers_) h = h * 0x9E3779B97F4A7C15ULL + l->branch_signature();
  return h;
}

template <typename From, typename To>
void copy_parameters(const Network<From>& from, Network<To>& to) {
  if (!(from.spec() == to.spec())) throw DimensionError("copy_parameters: network specs differ");
  const auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value.template cast<To>();
}

template class Network<float>;
template class Network<double>;
template void copy_parameters(const Network<float>&, Network<float>&);
template void copy_parameters(const Network<float>&, Network<double>&);
template void copy_parameters(const Network<double>&, Network<float>&);
template void copy_parameters(const Network<double>&, Network<double>&);

}  // namespace tabletop

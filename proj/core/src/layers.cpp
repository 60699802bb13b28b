#include "tabletop/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tabletop {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001B3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvBasis = 0xCBF29CE484222325ULL;

template <typename T>
void require_input_rank(const BasicTensor<T>& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(layer) + ": expected rank-" + std::to_string(rank) + " input, got " +
                         shape_string(x.shape()));
  }
}

template <typename T>
void require_cache(bool present, const char* layer) {
  if (!present) throw StateError(std::string(layer) + ": backward called without a train-mode forward");
}

}  // namespace

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2: return "maxpool2";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& text) {
  for (auto k : {LayerKind::conv2d, LayerKind::maxpool2, LayerKind::dense, LayerKind::relu, LayerKind::dropout,
                 LayerKind::flatten}) {
    if (text == to_string(k)) return k;
  }
  throw ParseError("unknown layer kind '" + text + "'");
}

const char* to_string(Padding padding) noexcept { return padding == Padding::same ? "same" : "valid"; }

Padding parse_padding(const std::string& text) {
  if (text == "same") return Padding::same;
  if (text == "valid") return Padding::valid;
  throw ParseError("unknown padding mode '" + text + "'");
}

LayerSpec LayerSpec::conv2d(std::size_t out_channels, std::size_t kernel, Padding padding) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.out_channels = out_channels;
  s.kernel = kernel;
  s.padding = padding;
  return s;
}

void LayerSpec::validate() const {
  switch (kind) {
    case LayerKind::conv2d:
      if (out_channels == 0 || kernel == 0) throw ValidationError("conv2d needs out_channels and kernel >= 1");
      if (stride != 1) throw ValidationError("conv2d supports stride 1 only");
      if (padding == Padding::same && kernel % 2 == 0)
        throw ValidationError("conv2d with same padding needs an odd kernel, got " + std::to_string(kernel));
      break;
    case LayerKind::dense:
      if (out_units == 0) throw ValidationError("dense needs out_units >= 1");
      break;
    case LayerKind::dropout:
      if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout rate must be in [0,1)");
      break;
    default: break;
  }
}

Shape LayerSpec::output_shape(const Shape& in) const {
  validate();
  const auto need_rank = [&](std::size_t r) {
    if (in.size() != r) {
      throw DimensionError(std::string(to_string(kind)) + " expects rank-" + std::to_string(r) + " input, got " +
                           shape_string(in));
    }
  };
  switch (kind) {
    case LayerKind::conv2d: {
      need_rank(3);
      const std::size_t pad = padding == Padding::same ? kernel / 2 : 0;
      ConvGeometry g{in[0], in[1], in[2], kernel, kernel, 1, pad};
      g.validate();
      return {out_channels, g.out_h(), g.out_w()};
    }
    case LayerKind::maxpool2:
      need_rank(3);
      if (in[1] < 2 || in[2] < 2)
        throw DimensionError("maxpool2 needs spatial extent >= 2x2, got " + shape_string(in));
      return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::dense:
      need_rank(1);
      return {out_units};
    case LayerKind::flatten: return {shape_volume(in)};
    case LayerKind::relu:
    case LayerKind::dropout: return in;
  }
  return in;
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, Padding padding)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      padding_(padding),
      weight_{"weight", BasicTensor<T>({out_channels, in_channels, kernel, kernel}),
              BasicTensor<T>({out_channels, in_channels, kernel, kernel})},
      bias_{"bias", BasicTensor<T>({out_channels}), BasicTensor<T>({out_channels})} {}

template <typename T>
BasicTensor<T> Conv2d<T>::forward(const BasicTensor<T>& x, Mode mode) {
  require_input_rank(x, 3, "conv2d");
  if (x.dim(0) != in_channels_) {
    throw DimensionError("conv2d: input has " + std::to_string(x.dim(0)) + " channels, weights expect " +
                         std::to_string(in_channels_));
  }
  geom_ = ConvGeometry{in_channels_, x.dim(1), x.dim(2), kernel_, kernel_, 1, pad()};
  auto cols = im2col(x, kernel_, kernel_, 1, pad());
  const auto w2 = weight_.value.reshaped({out_channels_, in_channels_ * kernel_ * kernel_});
  auto y = matmul(w2, cols).reshaped({out_channels_, geom_.out_h(), geom_.out_w()});
  add_channel_bias(y, bias_.value);
  if (mode == Mode::train) {
    cols_ = std::move(cols);
  } else {
    cols_.reset();
  }
  return y;
}

template <typename T>
BasicTensor<T> Conv2d<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(cols_.has_value(), "conv2d");
  const std::size_t oh = geom_.out_h(), ow = geom_.out_w();
  if (upstream.shape() != Shape{out_channels_, oh, ow}) {
    throw DimensionError("conv2d backward: upstream " + shape_string(upstream.shape()) + " does not match output");
  }
  const std::size_t k = in_channels_ * kernel_ * kernel_;
  const auto dy = upstream.reshaped({out_channels_, oh * ow});

  for (std::size_t o = 0; o < out_channels_; ++o) {
    T s{0};
    for (std::size_t p = 0; p < oh * ow; ++p) s += dy[o * oh * ow + p];
    bias_.grad[o] += s;
  }
  const auto dw = matmul(dy, transpose(*cols_));
  auto gw = weight_.grad.data();
  for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dw[i];

  if (!want_input_grad) return {};
  const auto w2 = weight_.value.reshaped({out_channels_, k});
  return col2im(matmul(transpose(w2), dy), geom_);
}

// ---------------------------------------------------------------- MaxPool2

template <typename T>
BasicTensor<T> MaxPool2<T>::forward(const BasicTensor<T>& x, Mode mode) {
  require_input_rank(x, 3, "maxpool2");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h < 2 || w < 2) throw DimensionError("maxpool2: input " + shape_string(x.shape()) + " smaller than 2x2 window");
  const std::size_t oh = h / 2, ow = w / 2;
  BasicTensor<T> y({c, oh, ow});
  std::vector<std::size_t> argmax(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + 2 * oy) * w + 2 * ox;
        T bv = x[best];
        // Row-major scan; strict '>' keeps the first maximum on ties.
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (ch * h + 2 * oy + dy) * w + 2 * ox + dx;
            if (x[idx] > bv) {
              bv = x[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        y[o] = bv;
        argmax[o] = best;
      }
    }
  }
  if (mode == Mode::train) {
    input_shape_ = x.shape();
    argmax_ = std::move(argmax);
  } else {
    clear_cache();
  }
  return y;
}

template <typename T>
BasicTensor<T> MaxPool2<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(!argmax_.empty(), "maxpool2");
  if (upstream.size() != argmax_.size()) {
    throw DimensionError("maxpool2 backward: upstream " + shape_string(upstream.shape()) + " does not match output");
  }
  if (!want_input_grad) return {};
  BasicTensor<T> dx(input_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) dx[argmax_[o]] += upstream[o];
  return dx;
}

template <typename T>
std::uint64_t MaxPool2<T>::branch_signature() const {
  std::uint64_t h = kFnvBasis;
  for (auto a : argmax_) h = fnv1a(h, a);
  return h;
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_units, std::size_t out_units)
    : in_units_(in_units),
      out_units_(out_units),
      weight_{"weight", BasicTensor<T>({in_units, out_units}), BasicTensor<T>({in_units, out_units})},
      bias_{"bias", BasicTensor<T>({out_units}), BasicTensor<T>({out_units})} {}

template <typename T>
BasicTensor<T> Dense<T>::forward(const BasicTensor<T>& x, Mode mode) {
  if (x.rank() != 1 || x.dim(0) != in_units_) {
    throw DimensionError("dense: input " + shape_string(x.shape()) + " does not match weights " +
                         shape_string(weight_.value.shape()));
  }
  auto y = matmul(x.reshaped({1, in_units_}), weight_.value).reshaped({out_units_});
  add_inplace(y, bias_.value);
  if (mode == Mode::train) {
    input_ = x;
  } else {
    input_.reset();
  }
  return y;
}

template <typename T>
BasicTensor<T> Dense<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(input_.has_value(), "dense");
  if (upstream.rank() != 1 || upstream.dim(0) != out_units_) {
    throw DimensionError("dense backward: upstream " + shape_string(upstream.shape()) + " does not match output");
  }
  const auto& x = *input_;
  T* gw = weight_.grad.data().data();
  const T* dy = upstream.data().data();
  for (std::size_t i = 0; i < in_units_; ++i) {
    const T xi = x[i];
    if (xi == T{0}) continue;
    T* row = gw + i * out_units_;
    for (std::size_t j = 0; j < out_units_; ++j) row[j] += xi * dy[j];
  }
  for (std::size_t j = 0; j < out_units_; ++j) bias_.grad[j] += dy[j];

  if (!want_input_grad) return {};
  BasicTensor<T> dx({in_units_});
  const T* w = weight_.value.data().data();
  for (std::size_t i = 0; i < in_units_; ++i) {
    T s{0};
    const T* row = w + i * out_units_;
    for (std::size_t j = 0; j < out_units_; ++j) s += row[j] * dy[j];
    dx[i] = s;
  }
  return dx;
}

// ---------------------------------------------------------------- Relu

template <typename T>
BasicTensor<T> Relu<T>::forward(const BasicTensor<T>& x, Mode mode) {
  BasicTensor<T> y = x;
  for (auto& v : y.data()) v = v > T{0} ? v : T{0};
  if (mode == Mode::train) {
    mask_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mask_[i] = x[i] > T{0} ? 1 : 0;
    shape_ = x.shape();
    has_mask_ = true;
  } else {
    clear_cache();
  }
  return y;
}

template <typename T>
BasicTensor<T> Relu<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(has_mask_, "relu");
  if (upstream.shape() != shape_) {
    throw DimensionError("relu backward: upstream " + shape_string(upstream.shape()) + " does not match input");
  }
  if (!want_input_grad) return {};
  BasicTensor<T> dx = upstream;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!mask_[i]) dx[i] = T{0};
  return dx;
}

template <typename T>
std::uint64_t Relu<T>::branch_signature() const {
  std::uint64_t h = kFnvBasis;
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    word = (word << 1) | mask_[i];
    if (i % 64 == 63) {
      h = fnv1a(h, word);
      word = 0;
    }
  }
  return fnv1a(h, word);
}

// ---------------------------------------------------------------- Dropout

template <typename T>
Dropout<T>::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout rate must be in [0,1)");
}

template <typename T>
BasicTensor<T> Dropout<T>::forward(const BasicTensor<T>& x, Mode mode) {
  if (mode == Mode::eval) {
    clear_cache();
    return x;
  }
  mask_.assign(x.size(), T{1});
  if (active_ && rate_ > 0.0) {
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
    for (auto& m : mask_) m = rng_.bernoulli(rate_) ? T{0} : keep_scale;
  }
  has_mask_ = true;
  BasicTensor<T> y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask_[i];
  return y;
}

template <typename T>
BasicTensor<T> Dropout<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(has_mask_, "dropout");
  if (upstream.size() != mask_.size()) throw DimensionError("dropout backward: upstream size mismatch");
  if (!want_input_grad) return {};
  BasicTensor<T> dx = upstream;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  return dx;
}

// ---------------------------------------------------------------- Flatten

template <typename T>
BasicTensor<T> Flatten<T>::forward(const BasicTensor<T>& x, Mode mode) {
  if (mode == Mode::train) {
    shape_ = x.shape();
  } else {
    clear_cache();
  }
  return x.reshaped({x.size()});
}

template <typename T>
BasicTensor<T> Flatten<T>::backward(const BasicTensor<T>& upstream, bool want_input_grad) {
  require_cache<T>(!shape_.empty(), "flatten");
  if (!want_input_grad) return {};
  return upstream.reshaped(shape_);
}

// ---------------------------------------------------------------- loss

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  if (logits.rank() != 1) throw DimensionError("softmax expects a rank-1 tensor, got " + shape_string(logits.shape()));
  const T mx = *std::max_element(logits.data().begin(), logits.data().end());
  BasicTensor<T> p = logits;
  T sum{0};
  for (auto& v : p.data()) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : p.data()) v /= sum;
  return p;
}

template <typename T>
SoftmaxXent<T> softmax_xent(const BasicTensor<T>& logits, std::size_t label) {
  if (logits.rank() != 1 || logits.dim(0) < 2) {
    throw DimensionError("softmax_xent needs >= 2 logits, got " + shape_string(logits.shape()));
  }
  if (label >= logits.dim(0)) {
    throw ValidationError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.dim(0)) +
                          " classes");
  }
  SoftmaxXent<T> r;
  // log-sum-exp in double so the loss stays finite even when probs[label]
  // underflows to zero.
  double mx = -std::numeric_limits<double>::infinity();
  for (auto v : logits.data()) mx = std::max(mx, static_cast<double>(v));
  double sum = 0.0;
  for (auto v : logits.data()) sum += std::exp(static_cast<double>(v) - mx);
  r.loss = std::log(sum) + mx - static_cast<double>(logits[label]);
  r.probs = softmax(logits);
  r.dlogits = r.probs;
  r.dlogits[label] -= T{1};
  return r;
}

template <typename T>
void he_uniform(BasicTensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

#define TABLETOP_INSTANTIATE(T)                                                  \
  template class Conv2d<T>;                                                      \
  template class MaxPool2<T>;                                                    \
  template class Dense<T>;                                                       \
  template class Relu<T>;                                                        \
  template class Dropout<T>;                                                     \
  template class Flatten<T>;                                                     \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                        \
  template SoftmaxXent<T> softmax_xent(const BasicTensor<T>&, std::size_t);      \
  template void he_uniform(BasicTensor<T>&, std::size_t, Rng&);

TABLETOP_INSTANTIATE(float)
TABLETOP_INSTANTIATE(double)

#undef TABLETOP_INSTANTIATE

}  // namespace tabletop

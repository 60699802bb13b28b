#include "tabletop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tabletop {

const char* to_string(Precision p) noexcept { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& text) {
  if (text == "f32") return Precision::f32;
  if (text == "f64") return Precision::f64;
  throw ValidationError("unknown precision '" + text + "' (expected f32 or f64)");
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor rank must be >= 1");
  for (auto e : shape) {
    if (e == 0) throw DimensionError("tensor extents must be >= 1, got " + shape_string(shape));
  }
}

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <typename T>
void require_rank(const BasicTensor<T>& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_volume(shape_), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_volume(shape_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
  }
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw DimensionError("axis out of range for shape " + shape_string(shape_));
  return shape_[axis];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
  if (shape_volume(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return BasicTensor(std::move(shape), data_);
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  BasicTensor<T> c({m, n});
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  T* pc = c.data().data();
  // i-t-j order: each c[i][j] still accumulates t = 0, 1, ..., k-1 in sequence,
  // while the j loop runs over contiguous memory.
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = pc + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const T av = pa[i * k + t];
      const T* brow = pb + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  BasicTensor<T> t({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
  return t;
}

template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "add");
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) da[i] += db[i];
}

template <typename T>
void scale_inplace(BasicTensor<T>& a, T factor) {
  for (auto& v : a.data()) v *= factor;
}

template <typename T>
void add_channel_bias(BasicTensor<T>& x, const BasicTensor<T>& bias) {
  if (bias.rank() != 1 || x.rank() < 1 || bias.dim(0) != x.dim(0)) {
    throw DimensionError("bias " + shape_string(bias.shape()) + " does not match leading axis of " +
                         shape_string(x.shape()));
  }
  const std::size_t inner = x.size() / x.dim(0);
  auto d = x.data();
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    const T b = bias[c];
    for (std::size_t i = 0; i < inner; ++i) d[c * inner + i] += b;
  }
}

template <typename T>
double dot(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

template <typename T>
bool all_finite(const BasicTensor<T>& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
BasicTensor<T> pad2d(const BasicTensor<T>& x, std::size_t top, std::size_t bottom, std::size_t left,
                     std::size_t right, T value) {
  require_rank(x, 3, "pad2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t oh = h + top + bottom, ow = w + left + right;
  BasicTensor<T> out({c, oh, ow}, value);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      std::copy_n(&x.at(ch, y, 0), w, &out.at(ch, y + top, left));
  return out;
}

template <typename T>
BasicTensor<T> crop2d(const BasicTensor<T>& x, std::size_t top, std::size_t bottom, std::size_t left,
                      std::size_t right) {
  require_rank(x, 3, "crop2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (top + bottom >= h || left + right >= w) {
    throw DimensionError("crop2d: crop exceeds extent of " + shape_string(x.shape()));
  }
  const std::size_t oh = h - top - bottom, ow = w - left - right;
  BasicTensor<T> out({c, oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < oh; ++y)
      std::copy_n(&x.at(ch, y + top, left), ow, &out.at(ch, y, 0));
  return out;
}

void ConvGeometry::validate() const {
  if (stride == 0) throw DimensionError("convolution stride must be >= 1");
  if (kernel_h == 0 || kernel_w == 0) throw DimensionError("kernel extents must be >= 1");
  if (kernel_h > height + 2 * pad || kernel_w > width + 2 * pad) {
    throw DimensionError("kernel " + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                         " larger than padded input " + std::to_string(height + 2 * pad) + "x" +
                         std::to_string(width + 2 * pad));
  }
}

template <typename T>
BasicTensor<T> im2col(const BasicTensor<T>& x, std::size_t kh, std::size_t kw, std::size_t stride,
                      std::size_t pad) {
  require_rank(x, 3, "im2col");
  const ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), kh, kw, stride, pad};
  g.validate();
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const std::size_t h = g.height, w = g.width;
  BasicTensor<T> cols({g.channels * kh * kw, oh * ow});
  T* out = cols.data().data();
  const T* in = x.data().data();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        T* row = out + ((c * kh + ky) * kw + kx) * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          // Signed arithmetic for the padded coordinate.
          const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
          T* dst = row + oy * ow;
          if (iy < 0 || iy >= static_cast<long>(h)) {
            std::fill_n(dst, ow, T{0});
            continue;
          }
          const T* src = in + (c * h + static_cast<std::size_t>(iy)) * w;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(w)) ? T{0} : src[ix];
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
BasicTensor<T> col2im(const BasicTensor<T>& cols, const ConvGeometry& g) {
  g.validate();
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const std::size_t kh = g.kernel_h, kw = g.kernel_w, h = g.height, w = g.width;
  if (cols.rank() != 2 || cols.dim(0) != g.channels * kh * kw || cols.dim(1) != oh * ow) {
    throw DimensionError("col2im: columns " + shape_string(cols.shape()) + " do not match geometry");
  }
  BasicTensor<T> x({g.channels, h, w});
  T* out = x.data().data();
  const T* in = cols.data().data();
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const T* row = in + ((c * kh + ky) * kw + kx) * oh * ow;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(h)) continue;
          T* dst = out + (c * h + static_cast<std::size_t>(iy)) * w;
          const T* src = row + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
            if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
  return x;
}

#define TABLETOP_INSTANTIATE(T)                                                                           \
  template class BasicTensor<T>;                                                                          \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                           \
  template BasicTensor<T> transpose(const BasicTensor<T>&);                                               \
  template void add_inplace(BasicTensor<T>&, const BasicTensor<T>&);                                      \
  template void scale_inplace(BasicTensor<T>&, T);                                                        \
  template void add_channel_bias(BasicTensor<T>&, const BasicTensor<T>&);                                 \
  template double dot(const BasicTensor<T>&, const BasicTensor<T>&);                                      \
  template double max_abs_diff(const BasicTensor<T>&, const BasicTensor<T>&);                             \
  template bool all_finite(const BasicTensor<T>&);                                                        \
  template BasicTensor<T> pad2d(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t, std::size_t, \
                                T);                                                                       \
  template BasicTensor<T> crop2d(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t,             \
                                 std::size_t);                                                            \
  template BasicTensor<T> im2col(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t,             \
                                 std::size_t);                                                            \
  template BasicTensor<T> col2im(const BasicTensor<T>&, const ConvGeometry&);

TABLETOP_INSTANTIATE(float)
TABLETOP_INSTANTIATE(double)

#undef TABLETOP_INSTANTIATE

}  // namespace tabletop

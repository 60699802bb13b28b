#pragma once

// Dense row-major n-dimensional arrays and the handful of kernels the layers
// need. Accumulation order in every reduction is fixed (ascending inner index),
// so results are bitwise reproducible for identical inputs.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tabletop/errors.hpp"

namespace tabletop {

enum class Precision { f32, f64 };

template <typename T>
constexpr Precision precision_of();
template <>
constexpr Precision precision_of<float>() { return Precision::f32; }
template <>
constexpr Precision precision_of<double>() { return Precision::f64; }

const char* to_string(Precision p) noexcept;
Precision parse_precision(const std::string& text);

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_volume(const Shape& shape);

template <typename T>
class BasicTensor {
public:
  using value_type = T;

  /// Rank-0 placeholder; only valid as an assignment target.
  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);
  BasicTensor(Shape shape, std::initializer_list<T> data)
      : BasicTensor(std::move(shape), std::vector<T>(data)) {}

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return shape_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t r, std::size_t c) noexcept { return data_[r * shape_[1] + c]; }
  const T& at(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_[1] + c]; }
  T& at(std::size_t ch, std::size_t y, std::size_t x) noexcept {
    return data_[(ch * shape_[1] + y) * shape_[2] + x];
  }
  const T& at(std::size_t ch, std::size_t y, std::size_t x) const noexcept {
    return data_[(ch * shape_[1] + y) * shape_[2] + x];
  }

  /// Same data, new shape of equal volume.
  BasicTensor reshaped(Shape shape) const;
  void fill(T value);

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor& other) const = default;

private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// c[i][j] = sum_t a[i][t] * b[t][j], t ascending.
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a);

/// a += b; shapes must match exactly.
template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
void scale_inplace(BasicTensor<T>& a, T factor);

/// Adds bias[c] to every element of channel c of x (shape [c, ...]).
template <typename T>
void add_channel_bias(BasicTensor<T>& x, const BasicTensor<T>& bias);

template <typename T>
double dot(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
bool all_finite(const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> pad2d(const BasicTensor<T>& x, std::size_t top, std::size_t bottom, std::size_t left,
                     std::size_t right, T value = T{0});

/// Inverse of pad2d: removes the given border counts.
template <typename T>
BasicTensor<T> crop2d(const BasicTensor<T>& x, std::size_t top, std::size_t bottom, std::size_t left,
                      std::size_t right);

struct ConvGeometry {
  std::size_t channels = 0, height = 0, width = 0;
  std::size_t kernel_h = 0, kernel_w = 0;
  std::size_t stride = 1, pad = 0;

  std::size_t out_h() const { return (height + 2 * pad - kernel_h) / stride + 1; }
  std::size_t out_w() const { return (width + 2 * pad - kernel_w) / stride + 1; }
  /// Throws DimensionError when the kernel does not fit the padded input.
  void validate() const;
};

/// [c,h,w] -> [c*kh*kw, out_h*out_w]. Row index is (channel, kernel row,
/// kernel col) in that nesting order; column j is the j-th output position in
/// row-major order.
template <typename T>
BasicTensor<T> im2col(const BasicTensor<T>& x, std::size_t kh, std::size_t kw, std::size_t stride,
                      std::size_t pad);

/// Adjoint of im2col: scatters-adds columns back into a [c,h,w] image.
template <typename T>
BasicTensor<T> col2im(const BasicTensor<T>& cols, const ConvGeometry& geom);

}  // namespace tabletop

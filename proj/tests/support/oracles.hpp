#pragma once

// Slow, obviously-correct reference implementations used as test oracles.

#include <cstddef>
#include <functional>
#include <vector>

#include "tabletop/rng.hpp"
#include "tabletop/tensor.hpp"

namespace oracle {

using tabletop::BasicTensor;

template <typename T>
std::vector<double> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < k; ++t) c[i * n + j] += double(a.at(i, t)) * double(b.at(t, j));
  return c;
}

/// Cross-correlation of x [c,h,w] with w [o,c,k,k] plus bias, zero padding `pad`, stride 1.
template <typename T>
std::vector<double> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                           std::size_t pad) {
  const std::size_t c = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t o = w.dim(0), k = w.dim(2);
  const std::size_t oh = h + 2 * pad - k + 1, ow = wd + 2 * pad - k + 1;
  std::vector<double> y(o * oh * ow, 0.0);
  for (std::size_t f = 0; f < o; ++f)
    for (std::size_t r = 0; r < oh; ++r)
      for (std::size_t q = 0; q < ow; ++q) {
        double s = double(bias[f]);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v) {
              const long yy = long(r + u) - long(pad), xx = long(q + v) - long(pad);
              if (yy < 0 || xx < 0 || yy >= long(h) || xx >= long(wd)) continue;
              s += double(w[((f * c + ch) * k + u) * k + v]) * double(x.at(ch, std::size_t(yy), std::size_t(xx)));
            }
        y[(f * oh + r) * ow + q] = s;
      }
  return y;
}

/// Central difference derivative of `loss` with respect to every element of `values`.
inline std::vector<double> numeric_gradient(std::vector<double>& values, const std::function<double()>& loss,
                                            double eps = 1e-5) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + eps;
    const double up = loss();
    values[i] = keep - eps;
    const double down = loss();
    values[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double rel_error(double a, double b) {
  const double d = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / d;
}

template <typename T>
BasicTensor<T> random_tensor(tabletop::Shape shape, tabletop::Rng& rng, double lo = -1.0, double hi = 1.0) {
  BasicTensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

}  // namespace oracle

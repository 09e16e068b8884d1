/*
Copyright 2026 The qreadout Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef QREADOUT_NN_LAYERS_HPP_
#define QREADOUT_NN_LAYERS_HPP_

// Forward and backward kernels for the fixed layer set. Dense products go
// through Eigen maps over the tensors' row-major storage.

#include <Eigen/Dense>

#include <string>

#include "qreadout/nn/tensor.hpp"

namespace qreadout::nn {

enum class Mode { Train, Eval };

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using ColMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

namespace detail {

inline Eigen::Index ei(std::size_t v) { return static_cast<Eigen::Index>(v); }

inline void require_rank(const Shape& s, std::size_t rank, const char* layer) {
  if (s.size() != rank)
    throw ShapeError(std::string(layer) + ": expected rank-" +
                     std::to_string(rank) + " input, got " + shape_string(s));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 1D convolution: valid mode, stride 1, cross-correlation.

/// Columns of the im2col matrix: one per (batch, output position); rows run
/// over (channel, tap).
template <class T>
ColMatrix<T> im2col(const Tensor<T>& x, std::size_t kernel) {
  const std::size_t b = x.dim(0), c = x.dim(1), len = x.dim(2);
  const std::size_t out_len = len - kernel + 1;
  ColMatrix<T> col(detail::ei(c * kernel), detail::ei(b * out_len));
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t n = 0; n < out_len; ++n) {
      T* dst = col.col(detail::ei(s * out_len + n)).data();
      for (std::size_t ch = 0; ch < c; ++ch) {
        const T* src = x.data() + (s * c + ch) * len + n;
        std::copy(src, src + kernel, dst + ch * kernel);
      }
    }
  return col;
}

/// out[b,o,n] = bias[o] + sum_{c,j} w[o,c,j] * in[b,c,n+j]
template <class T>
Tensor<T> conv1d_forward(const Tensor<T>& in, const Tensor<T>& weight,
                         const Tensor<T>& bias, ColMatrix<T>* col_cache = nullptr,
                         const char* layer = "conv1d") {
  detail::require_rank(in.shape(), 3, layer);
  const std::size_t b = in.dim(0), c_in = in.dim(1), len = in.dim(2);
  const std::size_t c_out = weight.dim(0), kernel = weight.dim(2);
  if (weight.dim(1) != c_in)
    throw ShapeError(std::string(layer) + ": weight expects " +
                     std::to_string(weight.dim(1)) + " input channels, got " +
                     std::to_string(c_in));
  if (len < kernel)
    throw ShapeError(std::string(layer) + ": input length " +
                     std::to_string(len) + " is shorter than kernel " +
                     std::to_string(kernel));
  const std::size_t out_len = len - kernel + 1;
  ColMatrix<T> col = im2col(in, kernel);
  Eigen::Map<const RowMatrix<T>> w(weight.data(), detail::ei(c_out),
                                   detail::ei(c_in * kernel));
  const ColMatrix<T> prod = w * col;  // c_out x (b * out_len)
  Tensor<T> out({b, c_out, out_len});
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t o = 0; o < c_out; ++o) {
      T* dst = out.data() + (s * c_out + o) * out_len;
      for (std::size_t n = 0; n < out_len; ++n)
        dst[n] = prod(detail::ei(o), detail::ei(s * out_len + n)) + bias[o];
    }
  if (col_cache) *col_cache = std::move(col);
  return out;
}

/// Accumulates nothing: grad_w and grad_b are overwritten. Returns the input
/// gradient when `want_input_grad`, otherwise an empty tensor.
template <class T>
Tensor<T> conv1d_backward(const Tensor<T>& grad_out, const ColMatrix<T>& col,
                          const Tensor<T>& weight, const Shape& in_shape,
                          Tensor<T>& grad_w, Tensor<T>& grad_b,
                          bool want_input_grad) {
  const std::size_t b = grad_out.dim(0), c_out = grad_out.dim(1),
                    out_len = grad_out.dim(2);
  const std::size_t c_in = weight.dim(1), kernel = weight.dim(2);
  ColMatrix<T> g(detail::ei(c_out), detail::ei(b * out_len));
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t o = 0; o < c_out; ++o) {
      const T* src = grad_out.data() + (s * c_out + o) * out_len;
      for (std::size_t n = 0; n < out_len; ++n)
        g(detail::ei(o), detail::ei(s * out_len + n)) = src[n];
    }
  grad_w = Tensor<T>(weight.shape());
  Eigen::Map<RowMatrix<T>> gw(grad_w.data(), detail::ei(c_out),
                              detail::ei(c_in * kernel));
  gw.noalias() = g * col.transpose();
  grad_b = Tensor<T>({c_out});
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(grad_b.data(),
                                                     detail::ei(c_out));
  gb = g.rowwise().sum();
  if (!want_input_grad) return {};

  Eigen::Map<const RowMatrix<T>> w(weight.data(), detail::ei(c_out),
                                   detail::ei(c_in * kernel));
  const ColMatrix<T> gcol = w.transpose() * g;
  Tensor<T> grad_in(in_shape);
  const std::size_t len = in_shape[2];
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t n = 0; n < out_len; ++n) {
      const T* src = gcol.col(detail::ei(s * out_len + n)).data();
      for (std::size_t ch = 0; ch < c_in; ++ch) {
        T* dst = grad_in.data() + (s * c_in + ch) * len + n;
        for (std::size_t j = 0; j < kernel; ++j) dst[j] += src[ch * kernel + j];
      }
    }
  return grad_in;
}

// ---------------------------------------------------------------------------
// Elementwise and structural layers

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = std::max(v, T(0));
  return y;
}

/// Gradient passes where the forward output was positive.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& out) {
  Tensor<T> g = grad_out;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!(out[k] > T(0))) g[k] = T(0);
  return g;
}

/// Max over non-overlapping windows of 3 along the last axis; trailing
/// samples that do not fill a window are dropped.
template <class T>
Tensor<T> maxpool3(const Tensor<T>& x, std::vector<std::uint32_t>* argmax = nullptr,
                   std::size_t window = 3) {
  detail::require_rank(x.shape(), 3, "maxpool");
  const std::size_t b = x.dim(0), c = x.dim(1), len = x.dim(2);
  const std::size_t out_len = len / window;
  if (out_len == 0)
    throw ShapeError("maxpool: input length " + std::to_string(len) +
                     " is shorter than the pooling window " +
                     std::to_string(window));
  Tensor<T> y({b, c, out_len});
  if (argmax) argmax->resize(y.size());
  for (std::size_t r = 0; r < b * c; ++r) {
    const T* src = x.data() + r * len;
    for (std::size_t n = 0; n < out_len; ++n) {
      std::size_t best = n * window;
      for (std::size_t j = 1; j < window; ++j)
        if (src[n * window + j] > src[best]) best = n * window + j;
      y[r * out_len + n] = src[best];
      if (argmax) (*argmax)[r * out_len + n] = static_cast<std::uint32_t>(r * len + best);
    }
  }
  return y;
}

template <class T>
Tensor<T> maxpool3_backward(const Tensor<T>& grad_out,
                            const std::vector<std::uint32_t>& argmax,
                            const Shape& in_shape) {
  Tensor<T> g(in_shape);
  for (std::size_t k = 0; k < grad_out.size(); ++k) g[argmax[k]] += grad_out[k];
  return g;
}

/// (b, c, l) -> (b, c*l)
template <class T>
Tensor<T> flatten(Tensor<T> x) {
  if (x.rank() < 2) throw ShapeError("flatten: input must have a batch axis");
  const std::size_t b = x.dim(0);
  x.reshape({b, x.size() / std::max<std::size_t>(b, 1)});
  return x;
}

/// Inverted dropout: in training, survivors are scaled by 1/(1-p) so that
/// evaluation is the identity. `mask` receives the per-element multiplier.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, double p, Mode mode, Rng* rng,
                  std::vector<T>* mask = nullptr) {
  if (mode == Mode::Eval || p == 0.0) {
    if (mask) mask->assign(x.size(), T(1));
    return x;
  }
  if (!(p >= 0 && p < 1)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (!rng) throw Error("dropout in training mode needs a random stream");
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = T(1.0 / (1.0 - p));
  Tensor<T> y(x.shape());
  std::vector<T> local;
  std::vector<T>& m = mask ? *mask : local;
  m.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    m[k] = keep(*rng) ? scale : T(0);
    y[k] = x[k] * m[k];
  }
  return y;
}

template <class T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const std::vector<T>& mask) {
  Tensor<T> g = grad_out;
  for (std::size_t k = 0; k < g.size(); ++k) g[k] *= mask[k];
  return g;
}

/// y = x A^T + b for x of shape (batch, in), A of shape (out, in).
template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias, const char* layer = "linear") {
  detail::require_rank(x.shape(), 2, layer);
  const std::size_t b = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (weight.dim(1) != in)
    throw ShapeError(std::string(layer) + ": expects " +
                     std::to_string(weight.dim(1)) + " features, got " +
                     std::to_string(in));
  Eigen::Map<const RowMatrix<T>> xm(x.data(), detail::ei(b), detail::ei(in));
  Eigen::Map<const RowMatrix<T>> wm(weight.data(), detail::ei(out), detail::ei(in));
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bm(bias.data(), detail::ei(out));
  Tensor<T> y({b, out});
  Eigen::Map<RowMatrix<T>> ym(y.data(), detail::ei(b), detail::ei(out));
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += bm;
  return y;
}

template <class T>
Tensor<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                          const Tensor<T>& weight, Tensor<T>& grad_w,
                          Tensor<T>& grad_b, bool want_input_grad) {
  const std::size_t b = x.dim(0), in = x.dim(1), out = weight.dim(0);
  Eigen::Map<const RowMatrix<T>> g(grad_out.data(), detail::ei(b), detail::ei(out));
  Eigen::Map<const RowMatrix<T>> xm(x.data(), detail::ei(b), detail::ei(in));
  grad_w = Tensor<T>(weight.shape());
  Eigen::Map<RowMatrix<T>> gw(grad_w.data(), detail::ei(out), detail::ei(in));
  gw.noalias() = g.transpose() * xm;
  grad_b = Tensor<T>({out});
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(grad_b.data(), detail::ei(out));
  gb = g.colwise().sum();
  if (!want_input_grad) return {};
  Eigen::Map<const RowMatrix<T>> wm(weight.data(), detail::ei(out), detail::ei(in));
  Tensor<T> gx({b, in});
  Eigen::Map<RowMatrix<T>> gxm(gx.data(), detail::ei(b), detail::ei(in));
  gxm.noalias() = g * wm;
  return gx;
}

/// Row-wise softmax over the last axis of a (batch, n) tensor.
template <class T>
Tensor<T> softmax(const Tensor<T>& x) {
  detail::require_rank(x.shape(), 2, "softmax");
  const std::size_t b = x.dim(0), n = x.dim(1);
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < b; ++r) {
    const T* src = x.data() + r * n;
    T* dst = y.data() + r * n;
    const T mx = *std::max_element(src, src + n);
    T sum = T(0);
    for (std::size_t k = 0; k < n; ++k) sum += (dst[k] = std::exp(src[k] - mx));
    for (std::size_t k = 0; k < n; ++k) dst[k] /= sum;
  }
  return y;
}

/// Vector-Jacobian product of softmax given its output p.
template <class T>
Tensor<T> softmax_backward(const Tensor<T>& grad_out, const Tensor<T>& p) {
  const std::size_t b = p.dim(0), n = p.dim(1);
  Tensor<T> g(p.shape());
  for (std::size_t r = 0; r < b; ++r) {
    T dot = T(0);
    for (std::size_t k = 0; k < n; ++k) dot += p[r * n + k] * grad_out[r * n + k];
    for (std::size_t k = 0; k < n; ++k)
      g[r * n + k] = p[r * n + k] * (grad_out[r * n + k] - dot);
  }
  return g;
}

/// Mean over all elements of (pred - target)^2.
template <class T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape())
    throw ShapeError("mse_loss: prediction " + shape_string(pred.shape()) +
                     " vs target " + shape_string(target.shape()));
  if (pred.empty()) throw ShapeError("mse_loss: empty tensors");
  T acc = T(0);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const T d = pred[k] - target[k];
    acc += d * d;
  }
  return acc / static_cast<T>(pred.size());
}

/// d(loss)/d(pred) with the mean taken over `denominator` elements.
template <class T>
Tensor<T> mse_loss_grad(const Tensor<T>& pred, const Tensor<T>& target,
                        std::size_t denominator) {
  Tensor<T> g(pred.shape());
  const T scale = T(2) / static_cast<T>(denominator);
  for (std::size_t k = 0; k < pred.size(); ++k) g[k] = scale * (pred[k] - target[k]);
  return g;
}

/// Weights ~ Normal(0, 2 / fan_in).
template <class T>
void he_init(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  if (fan_in == 0) throw ConfigError("he_init: fan_in must be > 0");
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (auto& v : w.values()) v = static_cast<T>(dist(rng));
}

}  // namespace qreadout::nn

#endif  // QREADOUT_NN_LAYERS_HPP_

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

#ifndef QREADOUT_NN_MODEL_HPP_
#define QREADOUT_NN_MODEL_HPP_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qreadout/dsp.hpp"
#include "qreadout/nn/layers.hpp"
#include "qreadout/nn/tensor.hpp"

namespace qreadout::nn {

// ---------------------------------------------------------------------------
// Architecture

enum class ModelKind { Cnn, Feedforward };

/// Layer sizes for either network family. The CNN is
///   conv(2->c1, k1) relu conv(c1->c2, k2) relu maxpool(3) flatten
///   dropout linear(n -> n/2) relu linear(n/2 -> classes);
/// the feedforward net is flatten linear(2L -> hidden) relu linear(-> classes).
struct Architecture {
  ModelKind kind = ModelKind::Cnn;
  std::size_t input_length = 128;
  std::size_t in_channels = 2;
  std::size_t conv1_channels = 16;
  std::size_t conv1_kernel = 32;
  std::size_t conv2_channels = 32;
  std::size_t conv2_kernel = 5;
  std::size_t pool = 3;
  double dropout = 0.5;
  std::size_t hidden = 128;  // feedforward only
  std::size_t n_classes = 3;
};

/// Desk-scale CNN: decimated length 128 with a 32-tap first kernel.
inline Architecture desk_cnn(std::size_t n_classes = 3) {
  Architecture a;
  a.n_classes = n_classes;
  return a;
}

/// Full-rate CNN with the 128-tap first kernel.
inline Architecture paper_cnn(std::size_t n_classes = 3) {
  Architecture a;
  a.input_length = 512;
  a.conv1_kernel = 128;
  a.n_classes = n_classes;
  return a;
}

/// First kernel of 10 taps, used for phase-robust training.
inline Architecture phase_robust_cnn(std::size_t input_length = 128,
                                     std::size_t n_classes = 3) {
  Architecture a;
  a.input_length = input_length;
  a.conv1_kernel = 10;
  a.n_classes = n_classes;
  return a;
}

inline Architecture vanilla_feedforward(std::size_t input_length = 128,
                                        std::size_t n_classes = 3,
                                        std::size_t hidden = 128) {
  Architecture a;
  a.kind = ModelKind::Feedforward;
  a.input_length = input_length;
  a.hidden = hidden;
  a.n_classes = n_classes;
  a.dropout = 0.0;
  return a;
}

// ---------------------------------------------------------------------------
// Layers

template <class T>
struct Conv1dLayer {
  std::string name;
  Tensor<T> weight, bias;  // (out, in, k), (out)
};
template <class T>
struct LinearLayer {
  std::string name;
  Tensor<T> weight, bias;  // (out, in), (out)
};
struct ReluLayer {};
struct MaxPoolLayer {
  std::size_t window = 3;
};
struct FlattenLayer {};
struct DropoutLayer {
  double rate = 0.5;
};

template <class T>
using Layer = std::variant<Conv1dLayer<T>, LinearLayer<T>, ReluLayer,
                           MaxPoolLayer, FlattenLayer, DropoutLayer>;

/// Activations saved by a forward pass for the matching backward pass.
template <class T>
struct LayerCache {
  Shape in_shape;
  Tensor<T> saved;               // linear input or relu output
  ColMatrix<T> col;              // conv im2col
  std::vector<std::uint32_t> argmax;
  std::vector<T> mask;
};

/// Validates that the layer chain is consistent for the configured input
/// length and returns the flattened feature count after pooling (CNN) or the
/// input feature count (feedforward). Names the first failing layer.
inline std::size_t check_shape_chain(const Architecture& a) {
  if (a.n_classes < 2 || a.n_classes > 3)
    throw ConfigError("output layer: n_classes must be 2 or 3, got " +
                      std::to_string(a.n_classes));
  if (a.input_length == 0) throw ConfigError("input: length must be > 0");
  if (a.in_channels == 0) throw ConfigError("input: channels must be > 0");
  if (!(a.dropout >= 0 && a.dropout < 1))
    throw ConfigError("dropout: rate must lie in [0, 1)");
  if (a.kind == ModelKind::Feedforward) {
    if (a.hidden == 0) throw ConfigError("fc1: hidden width must be > 0");
    return a.in_channels * a.input_length;
  }
  if (a.conv1_kernel == 0 || a.conv1_kernel > a.input_length)
    throw ConfigError("conv1: kernel " + std::to_string(a.conv1_kernel) +
                      " does not fit input length " +
                      std::to_string(a.input_length));
  const std::size_t l1 = a.input_length - a.conv1_kernel + 1;
  if (a.conv2_kernel == 0 || a.conv2_kernel > l1)
    throw ConfigError("conv2: kernel " + std::to_string(a.conv2_kernel) +
                      " does not fit conv1 output length " + std::to_string(l1));
  const std::size_t l2 = l1 - a.conv2_kernel + 1;
  if (a.pool == 0 || l2 / a.pool == 0)
    throw ConfigError("maxpool: window " + std::to_string(a.pool) +
                      " does not fit conv2 output length " + std::to_string(l2));
  const std::size_t features = a.conv2_channels * (l2 / a.pool);
  if (features / 2 == 0)
    throw ConfigError("fc1: flattened size " + std::to_string(features) +
                      " leaves no hidden units");
  if (a.conv1_channels == 0 || a.conv2_channels == 0)
    throw ConfigError("conv: channel counts must be > 0");
  return features;
}

// ---------------------------------------------------------------------------
// Network

template <class T>
class Network {
 public:
  Network() = default;

  /// Builds the layer list; weights are He-initialized and biases zero.
  Network(const Architecture& a, Rng& rng) : arch_(a) {
    const std::size_t features = check_shape_chain(a);
    auto conv = [&](std::string name, std::size_t in, std::size_t out, std::size_t k) {
      Conv1dLayer<T> l{std::move(name), Tensor<T>({out, in, k}), Tensor<T>({out})};
      he_init(l.weight, in * k, rng);
      layers_.emplace_back(std::move(l));
    };
    auto fc = [&](std::string name, std::size_t in, std::size_t out) {
      LinearLayer<T> l{std::move(name), Tensor<T>({out, in}), Tensor<T>({out})};
      he_init(l.weight, in, rng);
      layers_.emplace_back(std::move(l));
    };
    if (a.kind == ModelKind::Cnn) {
      conv("conv1", a.in_channels, a.conv1_channels, a.conv1_kernel);
      layers_.emplace_back(ReluLayer{});
      conv("conv2", a.conv1_channels, a.conv2_channels, a.conv2_kernel);
      layers_.emplace_back(ReluLayer{});
      layers_.emplace_back(MaxPoolLayer{a.pool});
      layers_.emplace_back(FlattenLayer{});
      layers_.emplace_back(DropoutLayer{a.dropout});
      fc("fc1", features, features / 2);
      layers_.emplace_back(ReluLayer{});
      fc("fc2", features / 2, a.n_classes);
    } else {
      layers_.emplace_back(FlattenLayer{});
      if (a.dropout > 0) layers_.emplace_back(DropoutLayer{a.dropout});
      fc("fc1", features, a.hidden);
      layers_.emplace_back(ReluLayer{});
      fc("fc2", a.hidden, a.n_classes);
    }
  }

  const Architecture& architecture() const { return arch_; }
  const std::vector<Layer<T>>& layers() const { return layers_; }

  /// Weight/bias tensors in a fixed order (layer order, weight before bias).
  std::vector<Tensor<T>*> parameters() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      std::visit([&](auto& layer) {
        using L = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<L, Conv1dLayer<T>> || std::is_same_v<L, LinearLayer<T>>) {
          out.push_back(&layer.weight);
          out.push_back(&layer.bias);
        }
      }, l);
    return out;
  }
  std::vector<const Tensor<T>*> parameters() const {
    std::vector<const Tensor<T>*> out;
    for (auto* p : const_cast<Network*>(this)->parameters()) out.push_back(p);
    return out;
  }
  std::vector<std::string> parameter_names() const {
    std::vector<std::string> out;
    for (const auto& l : layers_)
      std::visit([&](const auto& layer) {
        using L = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<L, Conv1dLayer<T>> || std::is_same_v<L, LinearLayer<T>>) {
          out.push_back(layer.name + ".weight");
          out.push_back(layer.name + ".bias");
        }
      }, l);
    return out;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->size();
    return n;
  }

  /// Logits for x of shape (batch, channels, length). When `caches` is given
  /// it receives what backward() needs.
  Tensor<T> forward(Tensor<T> x, Mode mode, Rng* rng,
                    std::vector<LayerCache<T>>* caches = nullptr) const {
    if (x.rank() != 3 || x.dim(1) != arch_.in_channels ||
        x.dim(2) != arch_.input_length)
      throw ShapeError("input: expected (batch, " +
                       std::to_string(arch_.in_channels) + ", " +
                       std::to_string(arch_.input_length) + "), got " +
                       shape_string(x.shape()));
    if (caches) caches->assign(layers_.size(), {});
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      LayerCache<T>* c = caches ? &(*caches)[k] : nullptr;
      if (c) c->in_shape = x.shape();
      x = std::visit([&](const auto& layer) -> Tensor<T> {
        using L = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<L, Conv1dLayer<T>>) {
          return conv1d_forward(x, layer.weight, layer.bias, c ? &c->col : nullptr,
                                layer.name.c_str());
        } else if constexpr (std::is_same_v<L, LinearLayer<T>>) {
          Tensor<T> y = linear(x, layer.weight, layer.bias, layer.name.c_str());
          if (c) c->saved = std::move(x);
          return y;
        } else if constexpr (std::is_same_v<L, ReluLayer>) {
          Tensor<T> y = relu(x);
          if (c) c->saved = y;
          return y;
        } else if constexpr (std::is_same_v<L, MaxPoolLayer>) {
          return maxpool3(x, c ? &c->argmax : nullptr, layer.window);
        } else if constexpr (std::is_same_v<L, FlattenLayer>) {
          return flatten(std::move(x));
        } else {
          return dropout(x, layer.rate, mode, rng, c ? &c->mask : nullptr);
        }
      }, layers_[k]);
    }
    return x;
  }

  /// Back-propagates d(loss)/d(logits). `grads` is filled in parameters()
  /// order and overwritten, not accumulated.
  void backward(Tensor<T> grad, const std::vector<LayerCache<T>>& caches,
                std::vector<Tensor<T>>& grads) const {
    if (caches.size() != layers_.size())
      throw Error("backward called without a matching forward pass");
    std::size_t n_params = 0;
    for (const auto& l : layers_)
      if (std::holds_alternative<Conv1dLayer<T>>(l) || std::holds_alternative<LinearLayer<T>>(l))
        n_params += 2;
    grads.resize(n_params);
    std::size_t slot = n_params;
    for (std::size_t k = layers_.size(); k-- > 0;) {
      const LayerCache<T>& c = caches[k];
      const bool want_input = k > 0;
      grad = std::visit([&](const auto& layer) -> Tensor<T> {
        using L = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<L, Conv1dLayer<T>>) {
          slot -= 2;
          return conv1d_backward(grad, c.col, layer.weight, c.in_shape,
                                 grads[slot], grads[slot + 1], want_input);
        } else if constexpr (std::is_same_v<L, LinearLayer<T>>) {
          slot -= 2;
          return linear_backward(grad, c.saved, layer.weight, grads[slot],
                                 grads[slot + 1], want_input);
        } else if constexpr (std::is_same_v<L, ReluLayer>) {
          return relu_backward(grad, c.saved);
        } else if constexpr (std::is_same_v<L, MaxPoolLayer>) {
          return maxpool3_backward(grad, c.argmax, c.in_shape);
        } else if constexpr (std::is_same_v<L, FlattenLayer>) {
          grad.reshape(c.in_shape);
          return grad;
        } else {
          return dropout_backward(grad, c.mask);
        }
      }, layers_[k]);
      if (!want_input) break;
    }
  }

 private:
  Architecture arch_;
  std::vector<Layer<T>> layers_;
};

// ---------------------------------------------------------------------------
// Adam

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // MSE against one-hot targets is taken on softmax outputs unless set.
  bool loss_on_logits = false;
  // RMS of the network inputs after scaling. The scale is fixed from the
  // first training batch and stored with the model.
  double input_rms = 0.05;
  std::size_t chunk = 128;  // traces per forward/backward slice

  void validate() const {
    if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be finite and >= 0");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
      throw ConfigError("Adam betas must lie in (0, 1)");
    if (!(epsilon > 0)) throw ConfigError("Adam epsilon must be > 0");
    if (chunk == 0) throw ConfigError("chunk must be > 0");
    if (!(input_rms > 0) || !std::isfinite(input_rms))
      throw ConfigError("input_rms must be finite and > 0");
  }
};

template <class T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update. `state.step` is incremented first, so the
/// first call uses t = 1.
template <class T>
void adam_step(std::span<Tensor<T>* const> params,
               std::span<const Tensor<T>> grads, AdamState<T>& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& w = *params[k];
    const Tensor<T>& g = grads[k];
    if (g.size() != w.size())
      throw ShapeError("adam_step: gradient " + std::to_string(k) + " has shape " +
                       shape_string(g.shape()) + ", parameter " +
                       shape_string(w.shape()));
    Tensor<T>& m = state.m[k];
    Tensor<T>& v = state.v[k];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const double m_hat = static_cast<double>(m[j]) / bc1;
      const double v_hat = static_cast<double>(v[j]) / bc2;
      w[j] -= static_cast<T>(cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
    }
  }
}

// ---------------------------------------------------------------------------
// Classifier model: network + optimizer state + input scaling

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

template <class T>
struct Model {
  Network<T> net;
  AdamState<T> adam;
  // Inputs are multiplied by this before the first layer. Set from the first
  // training batch (TrainConfig::input_rms / RMS of I and Q) when left at 0.
  double input_scale = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Eval;

  Model() = default;
  Model(const Architecture& a, std::uint64_t seed_) : seed(seed_) {
    Rng rng(detail::splitmix64(seed_));
    net = Network<T>(a, rng);
  }

  const Architecture& architecture() const { return net.architecture(); }
  std::size_t n_classes() const { return architecture().n_classes; }
};

/// Packs traces [lo, hi) into a (batch, 2, L) tensor.
template <class T>
Tensor<T> pack_inputs(const IqBatch& batch, std::size_t lo, std::size_t hi,
                      std::size_t length, double scale) {
  Tensor<T> x({hi - lo, 2, length});
  for (std::size_t s = lo; s < hi; ++s) {
    const IqTrace& iq = batch[s];
    if (iq.size() != length || iq.q.size() != length)
      throw ShapeError("input: model expects traces of length " +
                       std::to_string(length) + ", got " +
                       std::to_string(iq.size()));
    T* dst = x.data() + (s - lo) * 2 * length;
    for (std::size_t n = 0; n < length; ++n) {
      dst[n] = static_cast<T>(iq.i[n] * scale);
      dst[length + n] = static_cast<T>(iq.q[n] * scale);
    }
  }
  return x;
}

inline double rms_scale(const IqBatch& batch, double target_rms = 1.0) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& iq : batch) {
    for (double v : iq.i) acc += v * v;
    for (double v : iq.q) acc += v * v;
    n += iq.i.size() + iq.q.size();
  }
  const double rms = n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
  return rms > 0 ? target_rms / rms : 1.0;
}

/// Class index of a label for a model with `n_classes` outputs.
inline std::size_t class_of(State s, std::size_t n_classes) {
  const std::size_t c = index(s);
  if (c >= n_classes)
    throw Error(std::string("label |") + state_char(s) + "> has no output in a " +
                std::to_string(n_classes) + "-class model");
  return c;
}

template <class T>
Tensor<T> one_hot(const IqBatch& batch, std::size_t lo, std::size_t hi,
                  std::size_t n_classes) {
  Tensor<T> y({hi - lo, n_classes});
  for (std::size_t s = lo; s < hi; ++s) {
    if (!batch[s].label) throw Error("training trace has no label");
    y.at(s - lo, class_of(*batch[s].label, n_classes)) = T(1);
  }
  return y;
}

struct CycleResult {
  double loss = 0.0;
};

/// Loss and parameter gradients over the whole batch, processed in fixed
/// slices whose gradients are summed in slice order. Dropout masks are seeded
/// per (step, slice), so results do not depend on the worker count.
template <class T>
double loss_and_gradients(const Model<T>& model, const IqBatch& batch,
                          const TrainConfig& cfg, Mode mode, std::uint64_t step,
                          std::vector<Tensor<T>>& grads) {
  const Architecture& a = model.architecture();
  const std::size_t total = batch.size();
  if (total == 0) throw Error("training batch is empty");
  const std::size_t n_chunks = (total + cfg.chunk - 1) / cfg.chunk;
  const std::size_t denom = total * a.n_classes;

  std::vector<std::vector<Tensor<T>>> chunk_grads(n_chunks);
  std::vector<double> chunk_loss(n_chunks, 0.0);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * cfg.chunk, hi = std::min(total, lo + cfg.chunk);
    Rng mask_rng(detail::splitmix64(model.seed ^ detail::splitmix64(step * 1000003ull + c)));
    std::vector<LayerCache<T>> caches;
    Tensor<T> x = pack_inputs<T>(batch, lo, hi, a.input_length, model.input_scale);
    const Tensor<T> target = one_hot<T>(batch, lo, hi, a.n_classes);
    const Tensor<T> logits = model.net.forward(std::move(x), mode, &mask_rng, &caches);
    Tensor<T> dlogits;
    double sq = 0.0;
    if (cfg.loss_on_logits) {
      for (std::size_t k = 0; k < logits.size(); ++k) {
        const double d = static_cast<double>(logits[k] - target[k]);
        sq += d * d;
      }
      dlogits = mse_loss_grad(logits, target, denom);
    } else {
      const Tensor<T> p = softmax(logits);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = static_cast<double>(p[k] - target[k]);
        sq += d * d;
      }
      dlogits = softmax_backward(mse_loss_grad(p, target, denom), p);
    }
    chunk_loss[c] = sq;
    model.net.backward(std::move(dlogits), caches, chunk_grads[c]);
  };

  // Group slices so at most `workers` gradient sets are alive at once.
  const std::size_t workers = std::max<std::size_t>(1, worker_count());
  grads.clear();
  for (std::size_t g0 = 0; g0 < n_chunks; g0 += workers) {
    const std::size_t g1 = std::min(n_chunks, g0 + workers);
    parallel_for(g1 - g0, [&](std::size_t k) { run_chunk(g0 + k); });
    for (std::size_t c = g0; c < g1; ++c) {
      if (grads.empty()) {
        grads = std::move(chunk_grads[c]);
      } else {
        for (std::size_t p = 0; p < grads.size(); ++p) {
          auto& dst = grads[p].values();
          const auto& src = chunk_grads[c][p].values();
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
      }
      chunk_grads[c].clear();
      chunk_grads[c].shrink_to_fit();
    }
  }
  double loss = 0.0;
  for (double l : chunk_loss) loss += l;
  return loss / static_cast<double>(denom);
}

/// One full-batch forward, MSE loss, backward and Adam step. Returns the loss
/// measured before the step.
template <class T>
double train_cycle(Model<T>& model, const IqBatch& batch, const TrainConfig& cfg) {
  cfg.validate();
  if (batch.empty()) throw Error("train_cycle: empty batch");
  for (const auto& iq : batch)
    if (iq.size() != model.architecture().input_length)
      throw ShapeError("train_cycle: model expects traces of length " +
                       std::to_string(model.architecture().input_length) +
                       " (conv1 kernel " +
                       std::to_string(model.architecture().conv1_kernel) +
                       "), got " + std::to_string(iq.size()));
  if (model.input_scale == 0.0) model.input_scale = rms_scale(batch, cfg.input_rms);
  model.mode = Mode::Train;
  std::vector<Tensor<T>> grads;
  const double loss =
      loss_and_gradients(model, batch, cfg, Mode::Train, model.adam.step + 1, grads);
  auto params = model.net.parameters();
  adam_step<T>(params, grads, model.adam, cfg);
  model.mode = Mode::Eval;
  return loss;
}

/// Softmax outputs in evaluation mode, shape (batch, n_classes).
template <class T>
Tensor<T> predict_proba(const Model<T>& model, const IqBatch& batch,
                        std::size_t chunk = 256) {
  const Architecture& a = model.architecture();
  const double scale = model.input_scale == 0.0 ? 1.0 : model.input_scale;
  Tensor<T> out({batch.size(), a.n_classes});
  const std::size_t n_chunks = (batch.size() + chunk - 1) / chunk;
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(batch.size(), lo + chunk);
    const Tensor<T> p = softmax(model.net.forward(
        pack_inputs<T>(batch, lo, hi, a.input_length, scale), Mode::Eval, nullptr));
    std::copy(p.values().begin(), p.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(lo * a.n_classes));
  });
  return out;
}

/// Argmax over the outputs listed in `allowed` (all outputs when empty);
/// ties go to the lower state.
template <class T>
std::vector<State> predict(const Model<T>& model, const IqBatch& batch,
                           std::span<const State> allowed = {}) {
  const Tensor<T> p = predict_proba(model, batch);
  const std::size_t n = model.n_classes();
  std::vector<bool> ok(n, allowed.empty());
  for (State s : allowed)
    if (index(s) < n) ok[index(s)] = true;
  std::vector<State> out(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k)
      if (ok[k] && (best == n || p.at(r, k) > p.at(r, best))) best = k;
    if (best == n) throw ConfigError("predict: no allowed output classes");
    out[r] = state_from_index(best);
  }
  return out;
}

}  // namespace qreadout::nn

#endif  // QREADOUT_NN_MODEL_HPP_

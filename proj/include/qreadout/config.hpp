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

#ifndef QREADOUT_CONFIG_HPP_
#define QREADOUT_CONFIG_HPP_

#include <fstream>
#include <functional>
#include <map>
#include <string>

#include <nlohmann/json.hpp>
#include "qreadout/nn/checkpoint.hpp"
#include "qreadout/stream.hpp"

namespace qreadout {

struct DspSettings {
  double ddc_freq = 25e6;
  std::size_t n_taps = 40;
  double cutoff = 20e6;
  Window window = Window::Kaiser;
  double kaiser_beta = kDefaultKaiserBeta;
  std::size_t decimation = 4;

  DspConfig build(double sample_rate) const {
    DspConfig c;
    c.ddc_freq = ddc_freq;
    c.fir = design_fir(n_taps, cutoff, sample_rate, window, kaiser_beta);
    c.decimation = decimation;
    if (decimation == 0) throw ConfigError("dsp.decimation must be >= 1");
    return c;
  }
};

struct ModelSettings {
  std::size_t conv1_channels = 16;
  std::size_t conv1_kernel = 32;
  std::size_t conv2_channels = 32;
  std::size_t conv2_kernel = 5;
  std::size_t pool = 3;
  double dropout = 0.5;
  std::size_t phase_robust_kernel = 10;
  std::size_t feedforward_hidden = 128;
  std::size_t knn_k = 15;
};

struct SweepSettings {
  std::size_t n_points = 500;
  std::size_t n_per_state = 2048;
  bool common_random_numbers = true;
  double wait_jitter = 40e-9;  // phase-robust training: uniform wait in [0, 40 ns)
  // Phase-robust training cycles. Random phase makes the task slower to
  // learn than the fixed-phase one.
  std::size_t train_cycles = 500;
};

/// Every knob of a run. Presets fill all fields; a JSON file and explicit
/// flags then override individual fields.
struct RunConfig {
  std::string preset = "desk";
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<State> states = {State::G, State::E, State::F};
  std::size_t n_per_state = 2048;  // training/test batch size per state

  DeviceParams device;
  AcqConfig acq;
  DspSettings dsp;
  ModelSettings model;
  nn::TrainConfig train;
  StreamConfig stream;
  DriftScenario drift = default_drift(600.0);
  TrainSchedule schedule;
  SweepSettings sweep;

  Setup setup() const {
    Setup s;
    s.device = device;
    s.acq = acq;
    s.dsp = dsp.build(acq.sample_rate);
    return s;
  }

  std::size_t n_classes() const {
    for (State s : states)
      if (s == State::F) return 3;
    return 2;
  }

  nn::Architecture cnn_architecture(bool phase_robust = false) const {
    nn::Architecture a;
    a.input_length = acq.n_samples / dsp.decimation;
    a.conv1_channels = model.conv1_channels;
    a.conv1_kernel = phase_robust ? model.phase_robust_kernel : model.conv1_kernel;
    a.conv2_channels = model.conv2_channels;
    a.conv2_kernel = model.conv2_kernel;
    a.pool = model.pool;
    a.dropout = model.dropout;
    a.n_classes = n_classes();
    return a;
  }

  nn::Architecture feedforward_architecture() const {
    return nn::vanilla_feedforward(acq.n_samples / dsp.decimation, n_classes(),
                                   model.feedforward_hidden);
  }

  void validate() const {
    if (preset != "desk" && preset != "paper")
      throw ConfigError("preset must be 'desk' or 'paper', got '" + preset + "'");
    if (n_per_state == 0) throw ConfigError("n_per_state must be > 0");
    if (states.size() < 2) throw ConfigError("states must name at least two levels");
    device.validate();
    acq.validate();
    setup().validate();
    train.validate();
    StreamConfig sc = stream;
    sc.states = states;
    sc.validate();
    schedule.validate();
    drift.validate(stream.run_duration);
    nn::check_shape_chain(cnn_architecture());
    nn::check_shape_chain(cnn_architecture(true));
    nn::check_shape_chain(feedforward_architecture());
    if (model.knn_k == 0) throw ConfigError("model.knn_k must be >= 1");
    if (sweep.n_points == 0 || sweep.n_per_state == 0 || sweep.train_cycles == 0)
      throw ConfigError("sweep sizes must be > 0");
  }
};

/// Desk scale: decimated length 128 with a 32-tap first kernel, a ten-minute
/// virtual stream with a flush every 5 s and retraining every 2 minutes.
inline RunConfig desk_preset() {
  RunConfig c;
  c.preset = "desk";
  return c;
}

/// Full rate: 512-sample inputs, 128-tap first kernel, a 24 h stream with
/// back-to-back flushes and retraining every 2 hours.
inline RunConfig paper_preset() {
  RunConfig c;
  c.preset = "paper";
  c.dsp.decimation = 1;
  c.model.conv1_kernel = 128;
  c.stream.run_duration = 86400.0;
  c.stream.flush_interval = 0.0;
  c.schedule.interval = 7200.0;
  c.drift = default_drift(c.stream.run_duration);
  return c;
}

inline RunConfig preset_config(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "paper") return paper_preset();
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using json = nlohmann::json;

/// Applies known keys of a JSON object, rejecting anything else.
class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j.is_object()) throw ConfigError("'" + section_ + "' must be a JSON object");
  }

  template <class V>
  Reader& opt(const char* key, V& out) {
    known_.push_back(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->template get<V>();
      } catch (const json::exception& e) {
        throw ConfigError(path(key) + ": " + e.what());
      }
    }
    return *this;
  }

  Reader& custom(const char* key, const std::function<void(const json&, const std::string&)>& fn) {
    known_.push_back(key);
    if (auto it = j_.find(key); it != j_.end()) fn(*it, path(key));
    return *this;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(known_.begin(), known_.end(), it.key()) == known_.end())
        throw ConfigError("unknown config key '" + path(it.key()) + "'");
  }

 private:
  std::string path(const std::string& key) const {
    return section_.empty() ? key : section_ + "." + key;
  }
  const json& j_;
  std::string section_;
  std::vector<std::string> known_;
};

inline std::string window_name(Window w) { return w == Window::Kaiser ? "kaiser" : "hamming"; }

inline Window parse_window(const std::string& s) {
  if (s == "kaiser") return Window::Kaiser;
  if (s == "hamming") return Window::Hamming;
  throw ConfigError("unknown FIR window '" + s + "' (expected kaiser or hamming)");
}

inline const char* drift_kind_name(DriftKind k) {
  switch (k) {
    case DriftKind::None: return "none";
    case DriftKind::PhaseLinear: return "phase_linear";
    case DriftKind::PhaseJump: return "phase_jump";
    case DriftKind::GainLinear: return "gain_linear";
  }
  return "?";
}

inline DriftKind parse_drift_kind(const std::string& s) {
  if (s == "none") return DriftKind::None;
  if (s == "phase_linear") return DriftKind::PhaseLinear;
  if (s == "phase_jump") return DriftKind::PhaseJump;
  if (s == "gain_linear") return DriftKind::GainLinear;
  throw ConfigError("unknown drift kind '" + s + "'");
}

inline const char* trigger_name(RetrainTrigger t) {
  switch (t) {
    case RetrainTrigger::Interval: return "interval";
    case RetrainTrigger::Manual: return "manual";
    case RetrainTrigger::Never: return "never";
  }
  return "?";
}

inline RetrainTrigger parse_trigger(const std::string& s) {
  if (s == "interval") return RetrainTrigger::Interval;
  if (s == "manual") return RetrainTrigger::Manual;
  if (s == "never") return RetrainTrigger::Never;
  throw ConfigError("unknown retrain trigger '" + s + "'");
}

inline std::vector<Method> parse_methods(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of method names");
  std::vector<Method> out;
  for (const auto& m : j) {
    if (!m.is_string()) throw ConfigError(where + " entries must be strings");
    out.push_back(parse_method(m.get<std::string>()));
  }
  return out;
}

}  // namespace detail

inline nlohmann::json config_to_json(const RunConfig& c) {
  using json = nlohmann::json;
  json j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["states"] = states_string(c.states);
  j["n_per_state"] = c.n_per_state;
  j["device"] = {{"cavity_freq", c.device.cavity_freq}, {"freq_ge", c.device.freq_ge},
                 {"freq_ef", c.device.freq_ef},         {"chi_ge", c.device.chi_ge},
                 {"chi_ef", c.device.chi_ef},           {"kappa", c.device.kappa},
                 {"t1_e", c.device.t1_e},               {"t1_f", c.device.t1_f},
                 {"t2", c.device.t2},                   {"drive_amp", c.device.drive_amp}};
  j["acq"] = {{"sample_rate", c.acq.sample_rate}, {"n_samples", c.acq.n_samples},
              {"if_freq", c.acq.if_freq},         {"noise_sigma", c.acq.noise_sigma},
              {"prep_error", c.acq.prep_error}};
  j["dsp"] = {{"ddc_freq", c.dsp.ddc_freq},
              {"n_taps", c.dsp.n_taps},
              {"cutoff", c.dsp.cutoff},
              {"window", detail::window_name(c.dsp.window)},
              {"kaiser_beta", c.dsp.kaiser_beta},
              {"decimation", c.dsp.decimation}};
  j["model"] = {{"conv1_channels", c.model.conv1_channels},
                {"conv1_kernel", c.model.conv1_kernel},
                {"conv2_channels", c.model.conv2_channels},
                {"conv2_kernel", c.model.conv2_kernel},
                {"pool", c.model.pool},
                {"dropout", c.model.dropout},
                {"phase_robust_kernel", c.model.phase_robust_kernel},
                {"feedforward_hidden", c.model.feedforward_hidden},
                {"knn_k", c.model.knn_k}};
  j["train"] = {{"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},
                {"loss_on_logits", c.train.loss_on_logits},
                {"input_rms", c.train.input_rms},
                {"chunk", c.train.chunk}};
  json methods = json::array();
  for (Method m : c.stream.methods) methods.push_back(method_name(m));
  j["stream"] = {{"batch_size", c.stream.batch_size},
                 {"buffer_depth", c.stream.buffer_depth},
                 {"repetition_time", c.stream.repetition_time},
                 {"run_duration", c.stream.run_duration},
                 {"flush_interval", c.stream.flush_interval},
                 {"methods", methods},
                 {"realtime", c.stream.realtime},
                 {"time_scale", c.stream.time_scale},
                 {"consumer_delay", c.stream.consumer_delay}};
  json drift = json::array();
  for (const auto& d : c.drift.components)
    drift.push_back({{"kind", detail::drift_kind_name(d.kind)},
                     {"rate", d.rate},
                     {"at", d.at},
                     {"by", d.by}});
  j["drift"] = drift;
  j["schedule"] = {{"initial_cycles", c.schedule.initial_cycles},
                   {"retrain_cycles", c.schedule.retrain_cycles},
                   {"trigger", detail::trigger_name(c.schedule.trigger)},
                   {"interval", c.schedule.interval},
                   {"manual_times", c.schedule.manual_times}};
  j["sweep"] = {{"n_points", c.sweep.n_points},
                {"n_per_state", c.sweep.n_per_state},
                {"common_random_numbers", c.sweep.common_random_numbers},
                {"wait_jitter", c.sweep.wait_jitter},
                {"train_cycles", c.sweep.train_cycles}};
  return j;
}

/// Overlays a JSON document on `c`. Unknown keys raise ConfigError. A
/// "preset" key, when present, resets `c` to that preset first.
inline void apply_json(RunConfig& c, const nlohmann::json& j) {
  using json = nlohmann::json;
  using detail::Reader;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (auto it = j.find("preset"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("preset must be a string");
    c = preset_config(it->get<std::string>());
  }
  Reader top(j, "");
  std::string preset = c.preset;
  top.opt("preset", preset).opt("seed", c.seed).opt("out", c.out).opt("n_per_state",
                                                                      c.n_per_state);
  top.custom("states", [&](const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string such as \"gef\"");
    c.states = parse_states(v.get<std::string>());
  });
  top.custom("device", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("cavity_freq", c.device.cavity_freq)
        .opt("freq_ge", c.device.freq_ge)
        .opt("freq_ef", c.device.freq_ef)
        .opt("chi_ge", c.device.chi_ge)
        .opt("chi_ef", c.device.chi_ef)
        .opt("kappa", c.device.kappa)
        .opt("t1_e", c.device.t1_e)
        .opt("t1_f", c.device.t1_f)
        .opt("t2", c.device.t2)
        .opt("drive_amp", c.device.drive_amp)
        .finish();
  });
  top.custom("acq", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("sample_rate", c.acq.sample_rate)
        .opt("n_samples", c.acq.n_samples)
        .opt("if_freq", c.acq.if_freq)
        .opt("noise_sigma", c.acq.noise_sigma)
        .opt("prep_error", c.acq.prep_error)
        .finish();
  });
  top.custom("dsp", [&](const json& v, const std::string& where) {
    std::string window = detail::window_name(c.dsp.window);
    Reader(v, where)
        .opt("ddc_freq", c.dsp.ddc_freq)
        .opt("n_taps", c.dsp.n_taps)
        .opt("cutoff", c.dsp.cutoff)
        .opt("window", window)
        .opt("kaiser_beta", c.dsp.kaiser_beta)
        .opt("decimation", c.dsp.decimation)
        .finish();
    c.dsp.window = detail::parse_window(window);
  });
  top.custom("model", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("conv1_channels", c.model.conv1_channels)
        .opt("conv1_kernel", c.model.conv1_kernel)
        .opt("conv2_channels", c.model.conv2_channels)
        .opt("conv2_kernel", c.model.conv2_kernel)
        .opt("pool", c.model.pool)
        .opt("dropout", c.model.dropout)
        .opt("phase_robust_kernel", c.model.phase_robust_kernel)
        .opt("feedforward_hidden", c.model.feedforward_hidden)
        .opt("knn_k", c.model.knn_k)
        .finish();
  });
  top.custom("train", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("learning_rate", c.train.learning_rate)
        .opt("beta1", c.train.beta1)
        .opt("beta2", c.train.beta2)
        .opt("epsilon", c.train.epsilon)
        .opt("loss_on_logits", c.train.loss_on_logits)
        .opt("input_rms", c.train.input_rms)
        .opt("chunk", c.train.chunk)
        .finish();
  });
  top.custom("stream", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("batch_size", c.stream.batch_size)
        .opt("buffer_depth", c.stream.buffer_depth)
        .opt("repetition_time", c.stream.repetition_time)
        .opt("run_duration", c.stream.run_duration)
        .opt("flush_interval", c.stream.flush_interval)
        .custom("methods", [&](const json& m, const std::string& w) {
          c.stream.methods = detail::parse_methods(m, w);
        })
        .opt("realtime", c.stream.realtime)
        .opt("time_scale", c.stream.time_scale)
        .opt("consumer_delay", c.stream.consumer_delay)
        .finish();
  });
  top.custom("drift", [&](const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of components");
    DriftScenario s;
    for (std::size_t k = 0; k < v.size(); ++k) {
      DriftComponent d;
      std::string kind = "none";
      Reader(v[k], where + "[" + std::to_string(k) + "]")
          .opt("kind", kind)
          .opt("rate", d.rate)
          .opt("at", d.at)
          .opt("by", d.by)
          .finish();
      d.kind = detail::parse_drift_kind(kind);
      s.components.push_back(d);
    }
    c.drift = s;
  });
  top.custom("schedule", [&](const json& v, const std::string& where) {
    std::string trigger = detail::trigger_name(c.schedule.trigger);
    Reader(v, where)
        .opt("initial_cycles", c.schedule.initial_cycles)
        .opt("retrain_cycles", c.schedule.retrain_cycles)
        .opt("trigger", trigger)
        .opt("interval", c.schedule.interval)
        .opt("manual_times", c.schedule.manual_times)
        .finish();
    c.schedule.trigger = detail::parse_trigger(trigger);
  });
  top.custom("sweep", [&](const json& v, const std::string& where) {
    Reader(v, where)
        .opt("n_points", c.sweep.n_points)
        .opt("n_per_state", c.sweep.n_per_state)
        .opt("common_random_numbers", c.sweep.common_random_numbers)
        .opt("wait_jitter", c.sweep.wait_jitter)
        .opt("train_cycles", c.sweep.train_cycles)
        .finish();
  });
  top.finish();
}

inline RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  apply_json(base, j);
  return base;
}

}  // namespace qreadout

#endif  // QREADOUT_CONFIG_HPP_

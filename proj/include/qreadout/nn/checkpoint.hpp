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

#ifndef QREADOUT_NN_CHECKPOINT_HPP_
#define QREADOUT_NN_CHECKPOINT_HPP_

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>
#include "qreadout/nn/model.hpp"

namespace qreadout::nn {

namespace detail {

inline constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<std::uint8_t>& in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t k = 0;
  for (; k + 2 < in.size(); k += 3) {
    const std::uint32_t v = (in[k] << 16) | (in[k + 1] << 8) | in[k + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (k < in.size()) {
    std::uint32_t v = in[k] << 16;
    if (k + 1 < in.size()) v |= in[k + 1] << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += (k + 1 < in.size()) ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (in.size() % 4 != 0) throw Error("checkpoint: malformed base64 length");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t k = 0; k < in.size(); k += 4) {
    int v[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = in[k + j];
      if (c == '=' && k + 4 == in.size() && j >= 2) {
        v[j] = 0;
        ++pad;
      } else {
        v[j] = value(c);
        if (v[j] < 0 || pad) throw Error("checkpoint: invalid base64 character");
      }
    }
    const std::uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(w >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(w));
  }
  return out;
}

template <class T>
std::string encode_f32(const Tensor<T>& t) {
  std::vector<std::uint8_t> bytes(t.size() * 4);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(t[k]));
    for (int b = 0; b < 4; ++b) bytes[k * 4 + b] = static_cast<std::uint8_t>(u >> (8 * b));
  }
  return base64_encode(bytes);
}

template <class T>
void decode_f32(const std::string& text, Tensor<T>& t, const std::string& what) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != t.size() * 4)
    throw Error("checkpoint: " + what + " holds " + std::to_string(bytes.size() / 4) +
                " values, expected " + std::to_string(t.size()));
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= std::uint32_t{bytes[k * 4 + b]} << (8 * b);
    t[k] = static_cast<T>(std::bit_cast<float>(u));
  }
}

}  // namespace detail

inline nlohmann::json architecture_to_json(const Architecture& a) {
  nlohmann::json j;
  j["kind"] = a.kind == ModelKind::Cnn ? "cnn" : "feedforward";
  j["input_length"] = a.input_length;
  j["in_channels"] = a.in_channels;
  j["n_classes"] = a.n_classes;
  j["dropout"] = a.dropout;
  if (a.kind == ModelKind::Cnn) {
    j["conv1_channels"] = a.conv1_channels;
    j["conv1_kernel"] = a.conv1_kernel;
    j["conv2_channels"] = a.conv2_channels;
    j["conv2_kernel"] = a.conv2_kernel;
    j["pool"] = a.pool;
  } else {
    j["hidden"] = a.hidden;
  }
  return j;
}

inline Architecture architecture_from_json(const nlohmann::json& j) {
  Architecture a;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "cnn") a.kind = ModelKind::Cnn;
  else if (kind == "feedforward") a.kind = ModelKind::Feedforward;
  else throw ConfigError("checkpoint: unknown model kind '" + kind + "'");
  a.input_length = j.at("input_length").get<std::size_t>();
  a.in_channels = j.at("in_channels").get<std::size_t>();
  a.n_classes = j.at("n_classes").get<std::size_t>();
  a.dropout = j.at("dropout").get<double>();
  if (a.kind == ModelKind::Cnn) {
    a.conv1_channels = j.at("conv1_channels").get<std::size_t>();
    a.conv1_kernel = j.at("conv1_kernel").get<std::size_t>();
    a.conv2_channels = j.at("conv2_channels").get<std::size_t>();
    a.conv2_kernel = j.at("conv2_kernel").get<std::size_t>();
    a.pool = j.at("pool").get<std::size_t>();
  } else {
    a.hidden = j.at("hidden").get<std::size_t>();
  }
  check_shape_chain(a);
  return a;
}

template <class T>
nlohmann::json checkpoint_to_json(const Model<T>& model) {
  nlohmann::json j;
  j["format"] = "qreadout-checkpoint";
  j["version"] = 1;
  j["architecture"] = architecture_to_json(model.architecture());
  j["input_scale"] = model.input_scale;
  j["seed"] = model.seed;
  j["adam_step"] = model.adam.step;
  const auto names = model.net.parameter_names();
  const auto params = model.net.parameters();
  const bool have_moments = model.adam.m.size() == params.size();
  auto& list = j["parameters"] = nlohmann::json::array();
  for (std::size_t k = 0; k < params.size(); ++k) {
    nlohmann::json p;
    p["name"] = names[k];
    p["shape"] = params[k]->shape();
    p["data"] = detail::encode_f32(*params[k]);
    if (have_moments) {
      p["adam_m"] = detail::encode_f32(model.adam.m[k]);
      p["adam_v"] = detail::encode_f32(model.adam.v[k]);
    }
    list.push_back(std::move(p));
  }
  return j;
}

template <class T>
Model<T> checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "qreadout-checkpoint")
      throw Error("checkpoint: unrecognised format tag");
    if (j.at("version").get<int>() != 1)
      throw Error("checkpoint: unsupported version");
    const Architecture a = architecture_from_json(j.at("architecture"));
    Model<T> model(a, j.at("seed").get<std::uint64_t>());
    model.input_scale = j.at("input_scale").get<double>();
    model.adam.step = j.at("adam_step").get<std::uint64_t>();
    const auto names = model.net.parameter_names();
    auto params = model.net.parameters();
    const auto& list = j.at("parameters");
    if (list.size() != params.size())
      throw Error("checkpoint: " + std::to_string(list.size()) +
                  " parameter tensors, architecture needs " +
                  std::to_string(params.size()));
    bool moments = true;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto& p = list[k];
      if (p.at("name").get<std::string>() != names[k])
        throw Error("checkpoint: expected parameter " + names[k] + ", found " +
                    p.at("name").get<std::string>());
      if (p.at("shape").get<Shape>() != params[k]->shape())
        throw Error("checkpoint: " + names[k] + " has shape " +
                    shape_string(p.at("shape").get<Shape>()) + ", expected " +
                    shape_string(params[k]->shape()));
      detail::decode_f32(p.at("data").get<std::string>(), *params[k], names[k]);
      moments = moments && p.contains("adam_m") && p.contains("adam_v");
    }
    if (moments) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        model.adam.m.emplace_back(params[k]->shape());
        model.adam.v.emplace_back(params[k]->shape());
        detail::decode_f32(list[k].at("adam_m").get<std::string>(), model.adam.m[k],
                           names[k] + ".adam_m");
        detail::decode_f32(list[k].at("adam_v").get<std::string>(), model.adam.v[k],
                           names[k] + ".adam_v");
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: ") + e.what());
  }
}

template <class T>
void save_checkpoint(const Model<T>& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write checkpoint '" + path + "'");
  os << checkpoint_to_json(model).dump(1) << '\n';
  if (!os) throw Error("failed writing checkpoint '" + path + "'");
}

template <class T>
Model<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json<T>(j);
}

}  // namespace qreadout::nn

#endif  // QREADOUT_NN_CHECKPOINT_HPP_

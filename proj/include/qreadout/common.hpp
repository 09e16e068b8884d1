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

#ifndef QREADOUT_COMMON_HPP_
#define QREADOUT_COMMON_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace qreadout {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor or trace shapes that do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Transmon level prepared before readout. Ordering G < E < F is the
/// tie-break order used by every classifier.
enum class State : std::uint8_t { G = 0, E = 1, F = 2 };

inline constexpr std::array<State, 3> kAllStates = {State::G, State::E,
                                                    State::F};

inline constexpr std::size_t index(State s) {
  return static_cast<std::size_t>(s);
}

inline constexpr char state_char(State s) {
  switch (s) {
    case State::G: return 'g';
    case State::E: return 'e';
    case State::F: return 'f';
  }
  return '?';
}

inline State state_from_index(std::size_t i) {
  if (i > 2) throw Error("state index out of range: " + std::to_string(i));
  return static_cast<State>(i);
}

/// Parses "ge" or "gef" (any order, no repeats) into an ordered state list.
inline std::vector<State> parse_states(std::string_view text) {
  std::array<bool, 3> seen{};
  for (char c : text) {
    std::size_t i = 0;
    switch (c) {
      case 'g': case 'G': i = 0; break;
      case 'e': case 'E': i = 1; break;
      case 'f': case 'F': i = 2; break;
      default:
        throw ConfigError("unknown state '" + std::string(1, c) +
                          "' in state list \"" + std::string(text) + "\"");
    }
    if (seen[i])
      throw ConfigError("state list \"" + std::string(text) +
                        "\" repeats a state");
    seen[i] = true;
  }
  std::vector<State> out;
  for (std::size_t i = 0; i < 3; ++i)
    if (seen[i]) out.push_back(static_cast<State>(i));
  if (out.empty()) throw ConfigError("state list is empty");
  return out;
}

inline std::string states_string(std::span<const State> states) {
  std::string s;
  for (State st : states) s.push_back(state_char(st));
  return s;
}

/// Worker count for data-parallel loops, capped by QR_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QR_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, n) on up to worker_count() threads with a static
/// contiguous partition. Results must not depend on the partition.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn, &err = errors[w]] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qreadout

#endif  // QREADOUT_COMMON_HPP_

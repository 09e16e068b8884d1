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

#ifndef QREADOUT_TRACE_IO_HPP_
#define QREADOUT_TRACE_IO_HPP_

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "qreadout/sim.hpp"

// File layout, all little-endian:
//   16 bytes  magic "QRTRACE\0" + u32 version + u32 reserved (0)
//   u32 n_traces, u32 n_samples, f64 sample_rate
//   per trace: u8 label, f64 global_phase, n_samples x f32

namespace qreadout {

inline constexpr char kTraceMagic[8] = {'Q', 'R', 'T', 'R', 'A', 'C', 'E', '\0'};
inline constexpr std::uint32_t kTraceVersion = 1;

struct TraceFile {
  double sample_rate = 0.0;
  std::size_t n_samples = 0;
  LabeledBatch batch;
};

namespace detail {

template <class U>
void put_le(std::ostream& os, U v) {
  using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
               std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
  const auto bits = std::bit_cast<Bits>(v);
  char buf[sizeof(U)];
  for (std::size_t b = 0; b < sizeof(U); ++b)
    buf[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  os.write(buf, sizeof(U));
}

template <class U>
U get_le(std::istream& is, const char* what) {
  using Bits = std::conditional_t<sizeof(U) == 8, std::uint64_t,
               std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint8_t>>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U)))
    throw Error(std::string("trace file truncated while reading ") + what);
  Bits bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= Bits{buf[b]} << (8 * b);
  return std::bit_cast<U>(bits);
}

}  // namespace detail

inline void write_traces(std::ostream& os, const LabeledBatch& batch,
                         double sample_rate) {
  const std::size_t n_samples = batch.traces.empty() ? 0 : batch.traces[0].samples.size();
  if (batch.size() > 0xFFFFFFFFull || n_samples > 0xFFFFFFFFull)
    throw Error("trace file: batch too large for 32-bit header fields");
  os.write(kTraceMagic, 8);
  detail::put_le<std::uint32_t>(os, kTraceVersion);
  detail::put_le<std::uint32_t>(os, 0);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(batch.size()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(n_samples));
  detail::put_le<double>(os, sample_rate);
  for (const auto& t : batch.traces) {
    if (t.samples.size() != n_samples)
      throw ShapeError("trace file: traces must share one length");
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.prep));
    detail::put_le<double>(os, t.global_phase);
    for (float s : t.samples) detail::put_le<float>(os, s);
  }
  if (!os) throw Error("trace file: write failed");
}

inline TraceFile read_traces(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kTraceMagic, 8) != 0)
    throw Error("trace file: bad magic");
  const auto version = detail::get_le<std::uint32_t>(is, "version");
  if (version != kTraceVersion)
    throw Error("trace file: unsupported version " + std::to_string(version));
  detail::get_le<std::uint32_t>(is, "header");
  TraceFile f;
  const auto n_traces = detail::get_le<std::uint32_t>(is, "n_traces");
  f.n_samples = detail::get_le<std::uint32_t>(is, "n_samples");
  f.sample_rate = detail::get_le<double>(is, "sample_rate");
  f.batch.traces.resize(n_traces);
  for (std::uint32_t k = 0; k < n_traces; ++k) {
    RawTrace& t = f.batch.traces[k];
    const auto label = detail::get_le<std::uint8_t>(is, "label");
    if (label > 2)
      throw Error("trace file: trace " + std::to_string(k) + " has label " +
                  std::to_string(label));
    t.prep = state_from_index(label);
    t.global_phase = detail::get_le<double>(is, "global_phase");
    t.samples.resize(f.n_samples);
    for (auto& s : t.samples) s = detail::get_le<float>(is, "samples");
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw Error("trace file: trailing bytes after last trace");
  return f;
}

inline void save_traces(const std::string& path, const LabeledBatch& batch,
                        double sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write trace file '" + path + "'");
  write_traces(os, batch, sample_rate);
}

inline TraceFile load_traces(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open trace file '" + path + "'");
  return read_traces(is);
}

}  // namespace qreadout

#endif  // QREADOUT_TRACE_IO_HPP_

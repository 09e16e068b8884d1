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

#ifndef QREADOUT_DSP_HPP_
#define QREADOUT_DSP_HPP_

#include <optional>
#include <ostream>
#include <vector>

#include "qreadout/common.hpp"
#include "qreadout/sim.hpp"

namespace qreadout {

enum class Window { Hamming, Kaiser };

struct FirFilter {
  std::vector<double> taps;
  double cutoff = 0.0;
  double sample_rate = 0.0;
};

struct IqTrace {
  std::vector<double> i;
  std::vector<double> q;
  std::optional<State> label;

  std::size_t size() const { return i.size(); }
};

using IqBatch = std::vector<IqTrace>;

struct DspConfig {
  double ddc_freq = 25e6;
  FirFilter fir;
  std::size_t decimation = 4;
};

namespace detail {

inline double window_value(Window w, double kaiser_beta, std::size_t k,
                           std::size_t n) {
  if (n == 1) return 1.0;
  const double x = static_cast<double>(k) / static_cast<double>(n - 1);
  switch (w) {
    case Window::Hamming:
      return 0.54 - 0.46 * std::cos(kTwoPi * x);
    case Window::Kaiser: {
      const double r = 2.0 * x - 1.0;
      return std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(1.0 - r * r)) /
             std::cyl_bessel_i(0.0, kaiser_beta);
    }
  }
  return 1.0;
}

}  // namespace detail

inline constexpr double kDefaultKaiserBeta = 6.0;

/// Windowed-sinc low-pass normalized to unit DC gain. A single tap is the
/// identity filter.
inline FirFilter design_fir(std::size_t n_taps, double cutoff,
                            double sample_rate, Window window = Window::Kaiser,
                            double kaiser_beta = kDefaultKaiserBeta) {
  if (n_taps == 0) throw ConfigError("FIR needs at least one tap");
  if (!(sample_rate > 0) || !std::isfinite(sample_rate))
    throw ConfigError("FIR sample_rate must be finite and > 0");
  if (!(cutoff > 0) || !(cutoff < sample_rate / 2))
    throw ConfigError("FIR cutoff " + std::to_string(cutoff) +
                      " Hz outside (0, " + std::to_string(sample_rate / 2) +
                      ") Hz");
  FirFilter f;
  f.cutoff = cutoff;
  f.sample_rate = sample_rate;
  f.taps.assign(n_taps, 1.0);
  if (n_taps == 1) return f;

  const double fc = cutoff / sample_rate;
  const double centre = 0.5 * static_cast<double>(n_taps - 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_taps; ++k) {
    const double m = static_cast<double>(k) - centre;
    const double arg = std::numbers::pi * 2.0 * fc * m;
    const double sinc = (m == 0.0) ? 2.0 * fc : std::sin(arg) / (std::numbers::pi * m);
    f.taps[k] = sinc * detail::window_value(window, kaiser_beta, k, n_taps);
    sum += f.taps[k];
  }
  for (double& t : f.taps) t /= sum;
  return f;
}

/// sum_k taps[k] * exp(-i 2 pi f k / fs)
inline cplx frequency_response(const FirFilter& filter, double f) {
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < filter.taps.size(); ++k)
    acc += filter.taps[k] *
           std::polar(1.0, -kTwoPi * f * static_cast<double>(k) / filter.sample_rate);
  return acc;
}

inline DspConfig default_dsp_config(double sample_rate = 500e6,
                                    std::size_t decimation = 4) {
  DspConfig cfg;
  cfg.ddc_freq = 25e6;
  cfg.fir = design_fir(40, 20e6, sample_rate);
  cfg.decimation = decimation;
  return cfg;
}

inline void write_taps_csv(std::ostream& os, const FirFilter& f) {
  os << "index,tap\n";
  os.precision(17);
  for (std::size_t k = 0; k < f.taps.size(); ++k) os << k << ',' << f.taps[k] << '\n';
}

/// Mixes to baseband, low-passes, then keeps every `decimation`-th sample.
/// The filter runs in same-length mode: output n is centred on input n with
/// zero padding past both edges. Local-oscillator tables are precomputed for
/// `expected_length`; other lengths get a local table per call.
class Downconverter {
 public:
  explicit Downconverter(DspConfig cfg, std::size_t expected_length = 512)
      : cfg_(std::move(cfg)) {
    if (cfg_.decimation == 0) throw ConfigError("decimation must be >= 1");
    if (cfg_.fir.taps.empty()) throw ConfigError("DSP config has no FIR taps");
    if (!(cfg_.fir.sample_rate > 0))
      throw ConfigError("FIR sample_rate must be > 0");
    build_tables(expected_length, cos_, sin_);
  }

  const DspConfig& config() const { return cfg_; }

  std::size_t output_length(std::size_t n_in) const {
    return n_in / cfg_.decimation;
  }

  IqTrace operator()(std::span<const float> raw,
                     std::optional<State> label = std::nullopt) const {
    const std::size_t n_in = raw.size();
    const std::size_t n_taps = cfg_.fir.taps.size();
    if (n_in < n_taps)
      throw ShapeError("trace of " + std::to_string(n_in) +
                       " samples is shorter than the " +
                       std::to_string(n_taps) + "-tap filter");
    std::vector<double> local_cos, local_sin;
    const std::vector<double>* lo_cos = &cos_;
    const std::vector<double>* lo_sin = &sin_;
    if (cos_.size() != n_in) {
      build_tables(n_in, local_cos, local_sin);
      lo_cos = &local_cos;
      lo_sin = &local_sin;
    }

    std::vector<double> mix_i(n_in), mix_q(n_in);
    for (std::size_t n = 0; n < n_in; ++n) {
      const double s = 2.0 * static_cast<double>(raw[n]);
      mix_i[n] = s * (*lo_cos)[n];
      mix_q[n] = s * (*lo_sin)[n];
    }

    const std::size_t n_out = output_length(n_in);
    const auto delay = static_cast<std::ptrdiff_t>((n_taps - 1) / 2);
    const auto& h = cfg_.fir.taps;
    IqTrace out;
    out.label = label;
    out.i.resize(n_out);
    out.q.resize(n_out);
    for (std::size_t m = 0; m < n_out; ++m) {
      // y[n] = sum_k h[k] x[n + delay - k], zero outside [0, n_in)
      const auto n = static_cast<std::ptrdiff_t>(m * cfg_.decimation);
      const std::ptrdiff_t top = n + delay;
      const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, top - static_cast<std::ptrdiff_t>(n_in) + 1);
      const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_taps) - 1, top);
      double acc_i = 0.0, acc_q = 0.0;
      for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
        const auto x = static_cast<std::size_t>(top - k);
        acc_i += h[static_cast<std::size_t>(k)] * mix_i[x];
        acc_q += h[static_cast<std::size_t>(k)] * mix_q[x];
      }
      out.i[m] = acc_i;
      out.q[m] = acc_q;
    }
    return out;
  }

  IqTrace operator()(const RawTrace& raw) const {
    return (*this)(std::span<const float>(raw.samples), raw.prep);
  }

  IqBatch operator()(const LabeledBatch& batch) const {
    IqBatch out(batch.size());
    parallel_for(batch.size(),
                 [&](std::size_t k) { out[k] = (*this)(batch.traces[k]); });
    return out;
  }

 private:
  void build_tables(std::size_t n, std::vector<double>& c,
                    std::vector<double>& s) const {
    c.resize(n);
    s.resize(n);
    const double w = kTwoPi * cfg_.ddc_freq / cfg_.fir.sample_rate;
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = std::cos(w * static_cast<double>(k));
      s[k] = std::sin(w * static_cast<double>(k));
    }
  }

  DspConfig cfg_;
  std::vector<double> cos_, sin_;
};

inline IqTrace downconvert(const RawTrace& raw, const DspConfig& cfg) {
  return Downconverter(cfg)(raw);
}

}  // namespace qreadout

#endif  // QREADOUT_DSP_HPP_

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

#ifndef QREADOUT_SIM_HPP_
#define QREADOUT_SIM_HPP_

// Synthetic heterodyne readout of a transmon coupled to a driven, damped
// cavity. Each level pulls the cavity by its own detuning; relaxation jumps
// (F -> E -> G) switch the detuning mid-trace while the field stays
// continuous.

#include <limits>
#include <string>
#include <vector>

#include "qreadout/common.hpp"

namespace qreadout {

/// Device constants. Frequencies in Hz, shifts and rates in rad/s.
struct DeviceParams {
  double cavity_freq = 7.63e9;
  double freq_ge = 5.49e9;
  double freq_ef = 5.16e9;
  double chi_ge = kTwoPi * 8.50e6;  // 2*chi_ge as an angular frequency
  double chi_ef = kTwoPi * 15.57e6;  // 2*chi_ef as an angular frequency
  double kappa = kTwoPi * 1.56e6;
  double t1_e = 4.07e-6;
  double t1_f = 4.07e-6 / 2.0;
  double t2 = 4.29e-6;  // stored, not used by the readout model
  // Drive rate in the cavity equation. The default puts |alpha_G| near 1.
  double drive_amp = 2.7e7;

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(cavity_freq) || !finite(freq_ge) || !finite(freq_ef) ||
        !finite(chi_ge) || !finite(chi_ef) || !finite(kappa) ||
        !finite(drive_amp) || std::isnan(t1_e) || std::isnan(t1_f) ||
        std::isnan(t2))
      throw ConfigError("device parameters must be finite");
    if (!(kappa > 0)) throw ConfigError("kappa must be > 0");
    if (!(t1_e > 0) || !(t1_f > 0) || !(t2 > 0))
      throw ConfigError("lifetimes t1_e, t1_f, t2 must be > 0");
    if (!(cavity_freq > 0) || !(freq_ge > 0) || !(freq_ef > 0))
      throw ConfigError("frequencies must be > 0");
    if (drive_amp < 0) throw ConfigError("drive_amp must be >= 0");
  }
};

/// Sample A of the reference device table.
inline DeviceParams device_sample_a() {
  DeviceParams p;
  p.cavity_freq = 7.08e9;
  p.freq_ge = 6.27e9;
  p.freq_ef = 5.95e9;
  p.chi_ge = kTwoPi * 8.00e6;
  p.chi_ef = kTwoPi * 5.35e6;
  p.kappa = kTwoPi * 1.31e6;
  p.t1_e = 11.75e-6;
  p.t1_f = p.t1_e / 2.0;
  p.t2 = 3.17e-6;
  return p;
}

/// Sample B; identical to a default-constructed DeviceParams.
inline DeviceParams device_sample_b() { return {}; }

struct AcqConfig {
  double sample_rate = 500e6;
  std::size_t n_samples = 512;
  double if_freq = 25e6;
  double noise_sigma = 7.0;
  double prep_error = 0.0;

  void validate() const {
    if (n_samples == 0) throw ConfigError("n_samples must be > 0");
    if (!std::isfinite(sample_rate) || !(sample_rate > 0))
      throw ConfigError("sample_rate must be finite and > 0");
    if (!std::isfinite(if_freq) || !(if_freq >= 0) ||
        !(if_freq < sample_rate / 2))
      throw ConfigError("if_freq must lie in [0, sample_rate/2)");
    if (!std::isfinite(noise_sigma) || noise_sigma < 0)
      throw ConfigError("noise_sigma must be finite and >= 0");
    if (!(prep_error >= 0 && prep_error < 1))
      throw ConfigError("prep_error must lie in [0, 1)");
  }

  double duration() const { return static_cast<double>(n_samples) / sample_rate; }
};

struct DriftState {
  double phase_offset = 0.0;
  double amp_scale = 1.0;
  double t = 0.0;

  void validate() const {
    if (!std::isfinite(phase_offset))
      throw ConfigError("drift phase_offset must be finite");
    if (!std::isfinite(amp_scale) || !(amp_scale > 0))
      throw ConfigError("drift amp_scale must be finite and > 0");
  }
};

struct Jump {
  double time;
  State from;
  State to;
};

struct RawTrace {
  std::vector<float> samples;
  State prep = State::G;
  double global_phase = 0.0;
  std::vector<Jump> true_jumps;  // simulation ground truth, not serialized
};

struct LabeledBatch {
  std::vector<RawTrace> traces;
  std::size_t size() const { return traces.size(); }
};

/// Cavity detuning seen while the transmon sits in `level`.
inline double detuning(const DeviceParams& p, State level) {
  const double half_ge = 0.5 * p.chi_ge;
  const double half_ef = 0.5 * p.chi_ef;
  switch (level) {
    case State::G: return half_ge;
    case State::E: return -half_ge;
    case State::F: return -half_ge - half_ef;
  }
  return 0.0;
}

/// alpha = eps / (i*Delta + kappa/2)
inline cplx steady_state_amplitude(const DeviceParams& p, State level) {
  return p.drive_amp / cplx(0.5 * p.kappa, detuning(p, level));
}

/// Relaxation cascade during a window of `duration` seconds. Every call
/// consumes the same number of variates for a given `prep`, so schedules
/// stay aligned across runs that differ only in other settings.
inline std::vector<Jump> sample_jump_schedule(const DeviceParams& p, State prep,
                                              double duration, Rng& rng) {
  if (!(duration > 0)) throw ConfigError("jump window duration must be > 0");
  // Inverse-CDF draws so that t1 = inf (never decays) is well defined.
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto lifetime = [&](double t1) { return -t1 * std::log1p(-uni(rng)); };

  std::vector<Jump> jumps;
  switch (prep) {
    case State::G:
      break;
    case State::E: {
      const double t = lifetime(p.t1_e);
      if (t < duration) jumps.push_back({t, State::E, State::G});
      break;
    }
    case State::F: {
      const double t_fe = lifetime(p.t1_f);
      const double t_eg = t_fe + lifetime(p.t1_e);
      if (t_fe < duration) {
        jumps.push_back({t_fe, State::F, State::E});
        if (t_eg < duration && t_eg > t_fe)
          jumps.push_back({t_eg, State::E, State::G});
      }
      break;
    }
  }
  return jumps;
}

namespace detail {

inline State one_level_lower(State s) {
  switch (s) {
    case State::G: return State::G;
    case State::E: return State::G;
    case State::F: return State::E;
  }
  return s;
}

// Exact propagator for d(alpha)/dt = -(i*Delta + kappa/2)*alpha + eps.
struct CavityLevel {
  cplx rate;    // i*Delta + kappa/2
  cplx steady;  // eps / rate
  cplx step;    // exp(-rate * dt)

  cplx advance(cplx alpha, double h) const {
    return steady + (alpha - steady) * std::exp(-rate * h);
  }
  cplx advance_dt(cplx alpha) const { return steady + (alpha - steady) * step; }
};

}  // namespace detail

/// One readout record. Noise is drawn as a circular complex baseband term
/// riding on the carrier: s = Re[(g*alpha + nu) * exp(i(w t + phi))], with
/// Re[nu * exp(i theta)] ~ N(0, sigma^2) independently per sample. The phase
/// offset therefore rotates the whole record, noise included.
inline RawTrace simulate_trace(const DeviceParams& p, const AcqConfig& acq,
                               State prep, const DriftState& drift, Rng& rng) {
  p.validate();
  acq.validate();
  drift.validate();

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u_prep = uni(rng);
  const State actual =
      (u_prep < acq.prep_error) ? detail::one_level_lower(prep) : prep;

  const double dt = 1.0 / acq.sample_rate;
  const double duration = acq.duration();
  RawTrace trace;
  trace.prep = prep;
  trace.global_phase = drift.phase_offset;
  trace.true_jumps = sample_jump_schedule(p, actual, duration, rng);
  trace.samples.resize(acq.n_samples);

  std::array<detail::CavityLevel, 3> levels;
  for (State s : kAllStates) {
    auto& lv = levels[index(s)];
    lv.rate = cplx(0.5 * p.kappa, detuning(p, s));
    lv.steady = p.drive_amp / lv.rate;
    lv.step = std::exp(-lv.rate * dt);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = acq.noise_sigma;
  const double w_if = kTwoPi * acq.if_freq;

  cplx alpha(0.0, 0.0);
  State level = actual;
  std::size_t next_jump = 0;
  for (std::size_t n = 0; n < acq.n_samples; ++n) {
    const double t = static_cast<double>(n) * dt;
    cplx field = drift.amp_scale * alpha;
    if (sigma > 0) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      field += sigma * cplx(re, im);
    }
    const cplx carrier = std::polar(1.0, w_if * t + drift.phase_offset);
    trace.samples[n] = static_cast<float>((field * carrier).real());

    // Advance to t + dt, splitting the step at any jump inside it.
    const double t_end = t + dt;
    double t_cur = t;
    bool split = false;
    while (next_jump < trace.true_jumps.size() &&
           trace.true_jumps[next_jump].time < t_end) {
      const Jump& j = trace.true_jumps[next_jump];
      alpha = levels[index(level)].advance(alpha, j.time - t_cur);
      t_cur = j.time;
      level = j.to;
      ++next_jump;
      split = true;
    }
    alpha = split ? levels[index(level)].advance(alpha, t_end - t_cur)
                  : levels[index(level)].advance_dt(alpha);
  }
  return trace;
}

struct BatchOptions {
  // Each trace waits a uniform time in [0, wait_jitter) before readout,
  // which shifts its carrier phase by 2*pi*if_freq*wait.
  double wait_jitter = 0.0;
};

/// n_per_state traces for each state, interleaved round-robin. Each trace is
/// simulated from its own stream seeded by one draw from `rng`.
inline LabeledBatch generate_batch(const DeviceParams& p, const AcqConfig& acq,
                                   std::size_t n_per_state,
                                   std::span<const State> states,
                                   const DriftState& drift, Rng& rng,
                                   const BatchOptions& opts = {}) {
  if (n_per_state == 0) throw ConfigError("n_per_state must be > 0");
  if (states.empty()) throw ConfigError("batch needs at least one state");
  p.validate();
  acq.validate();
  drift.validate();
  if (opts.wait_jitter < 0) throw ConfigError("wait_jitter must be >= 0");

  const std::size_t total = n_per_state * states.size();
  std::vector<std::uint64_t> seeds(total);
  std::vector<double> phases(total, drift.phase_offset);
  std::uniform_real_distribution<double> wait(0.0, 1.0);
  for (std::size_t i = 0; i < total; ++i) {
    seeds[i] = rng();
    if (opts.wait_jitter > 0)
      phases[i] += kTwoPi * acq.if_freq * opts.wait_jitter * wait(rng);
  }

  LabeledBatch batch;
  batch.traces.resize(total);
  parallel_for(total, [&](std::size_t i) {
    Rng local(seeds[i]);
    DriftState d = drift;
    d.phase_offset = phases[i];
    batch.traces[i] =
        simulate_trace(p, acq, states[i % states.size()], d, local);
  });
  return batch;
}

}  // namespace qreadout

#endif  // QREADOUT_SIM_HPP_

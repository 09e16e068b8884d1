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

#ifndef QREADOUT_STREAM_HPP_
#define QREADOUT_STREAM_HPP_

#include <chrono>
#include <condition_variable>
#include <deque>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "qreadout/dsp.hpp"
#include "qreadout/evaluate.hpp"
#include "qreadout/nn/model.hpp"
#include "qreadout/sim.hpp"

namespace qreadout {

// ---------------------------------------------------------------------------
// Bounded hand-off queue

/// Fixed-capacity FIFO between one producer and one consumer. Items move in
/// and out by value; nothing is shared after the hand-off.
template <class Item>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("queue capacity must be >= 1");
  }

  /// Blocks while full. Returns true if the call had to wait.
  bool push(Item item) {
    std::unique_lock lock(mu_);
    const bool waited = items_.size() >= capacity_;
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) throw Error("push on a closed queue");
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return waited;
  }

  /// Blocks while empty; nullopt once closed and drained.
  std::optional<Item> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    Item item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<Item> items_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Configuration

enum class Method { Baseline, CalBaseline, Cnn };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Baseline: return "baseline";
    case Method::CalBaseline: return "cal_baseline";
    case Method::Cnn: return "cnn";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "baseline") return Method::Baseline;
  if (s == "cal_baseline") return Method::CalBaseline;
  if (s == "cnn") return Method::Cnn;
  throw ConfigError("unknown stream method '" + std::string(s) +
                    "' (expected baseline, cal_baseline or cnn)");
}

struct StreamConfig {
  std::size_t batch_size = 2048;  // traces per state per flush
  std::size_t buffer_depth = 2;
  double repetition_time = 40e-6;  // s per shot
  double run_duration = 600.0;     // virtual seconds
  // Virtual seconds between the starts of consecutive flushes. A flush never
  // starts before the previous acquisition finished.
  double flush_interval = 5.0;
  std::vector<Method> methods = {Method::Baseline, Method::CalBaseline, Method::Cnn};
  std::vector<State> states = {State::G, State::E, State::F};
  // Pace the producer against the wall clock: `time_scale` virtual seconds
  // per wall second.
  bool realtime = false;
  double time_scale = 1.0;
  // Extra wall time spent by the consumer per flush; for contention tests.
  double consumer_delay = 0.0;

  double acquisition_time() const {
    return static_cast<double>(batch_size * states.size()) * repetition_time;
  }
  double flush_period() const { return std::max(flush_interval, acquisition_time()); }
  std::size_t n_flushes() const {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(run_duration / flush_period() + 1e-9)));
  }
  bool has(Method m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  }

  void validate() const {
    if (buffer_depth < 2) throw ConfigError("buffer_depth must be >= 2");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(repetition_time > 0) || !std::isfinite(repetition_time))
      throw ConfigError("repetition_time must be finite and > 0");
    if (!(run_duration > 0) || !std::isfinite(run_duration))
      throw ConfigError("run_duration must be finite and > 0");
    if (!(flush_interval >= 0) || !std::isfinite(flush_interval))
      throw ConfigError("flush_interval must be finite and >= 0");
    if (!(time_scale > 0) || !std::isfinite(time_scale))
      throw ConfigError("time_scale must be finite and > 0");
    if (!(consumer_delay >= 0)) throw ConfigError("consumer_delay must be >= 0");
    if (methods.empty()) throw ConfigError("stream needs at least one method");
    if (states.size() < 2) throw ConfigError("stream needs at least two states");
  }
};

/// Fast acquisition mode: 3.2 us per repetition.
inline StreamConfig fast_stream_config() {
  StreamConfig c;
  c.repetition_time = 3.2e-6;
  return c;
}

enum class DriftKind { None, PhaseLinear, PhaseJump, GainLinear };

struct DriftComponent {
  DriftKind kind = DriftKind::None;
  double rate = 0.0;  // rad/s for phase_linear, 1/s for gain_linear
  double at = 0.0;    // phase_jump time, s
  double by = 0.0;    // phase_jump size, rad
};

/// Sum of drift components; several components form a composite scenario.
/// Phases add; gains add as 1 + sum(rate * t).
struct DriftScenario {
  std::vector<DriftComponent> components;

  DriftState at(double t) const {
    DriftState d;
    d.t = t;
    double gain = 0.0;
    for (const auto& c : components) {
      switch (c.kind) {
        case DriftKind::None: break;
        case DriftKind::PhaseLinear: d.phase_offset += c.rate * t; break;
        case DriftKind::PhaseJump:
          if (t >= c.at) d.phase_offset += c.by;
          break;
        case DriftKind::GainLinear: gain += c.rate * t; break;
      }
    }
    d.amp_scale = 1.0 + gain;
    return d;
  }

  void validate(double run_duration) const {
    for (const auto& c : components)
      if (!std::isfinite(c.rate) || !std::isfinite(c.at) || !std::isfinite(c.by))
        throw ConfigError("drift parameters must be finite");
    // Gain is linear in t, so checking both ends covers the run.
    if (!(at(0.0).amp_scale > 0) || !(at(run_duration).amp_scale > 0))
      throw ConfigError("drift drives amp_scale to <= 0 within the run");
  }

  static DriftScenario none() { return {}; }
  static DriftScenario phase_linear(double rate) {
    return {{{DriftKind::PhaseLinear, rate, 0.0, 0.0}}};
  }
  static DriftScenario phase_jump(double at, double by) {
    return {{{DriftKind::PhaseJump, 0.0, at, by}}};
  }
  static DriftScenario gain_linear(double rate) {
    return {{{DriftKind::GainLinear, rate, 0.0, 0.0}}};
  }
  static DriftScenario composite(std::vector<DriftScenario> parts) {
    DriftScenario s;
    for (auto& p : parts)
      s.components.insert(s.components.end(), p.components.begin(), p.components.end());
    return s;
  }
};

/// Default slow drift: a quarter turn of phase and +5% gain over the run.
inline DriftScenario default_drift(double run_duration) {
  return DriftScenario::composite(
      {DriftScenario::phase_linear(std::numbers::pi / 2 / run_duration),
       DriftScenario::gain_linear(0.05 / run_duration)});
}

enum class RetrainTrigger { Interval, Manual, Never };

struct TrainSchedule {
  std::size_t initial_cycles = 100;
  std::size_t retrain_cycles = 20;
  RetrainTrigger trigger = RetrainTrigger::Interval;
  double interval = 120.0;               // virtual s, for Interval
  std::vector<double> manual_times;      // virtual s, for Manual

  void validate() const {
    if (trigger == RetrainTrigger::Interval && !(interval > 0))
      throw ConfigError("retrain interval must be > 0");
    if (trigger != RetrainTrigger::Never && retrain_cycles == 0)
      throw ConfigError("schedule requests retraining but retrain_cycles is 0");
    for (double t : manual_times)
      if (!std::isfinite(t) || t < 0)
        throw ConfigError("manual retrain times must be finite and >= 0");
  }
};

/// The physical and DSP setup shared by every experiment.
struct Setup {
  DeviceParams device;
  AcqConfig acq;
  DspConfig dsp = default_dsp_config();

  void validate() const {
    device.validate();
    acq.validate();
    if (std::abs(dsp.fir.sample_rate - acq.sample_rate) > 1e-6 * acq.sample_rate)
      throw ConfigError("FIR sample_rate does not match the acquisition rate");
  }
  std::size_t iq_length() const { return acq.n_samples / dsp.decimation; }
};

namespace detail {

inline void put_number(std::ostream& os, double v) {
  if (std::isfinite(v)) os << v;
}

inline std::uint64_t role_seed(std::uint64_t master, std::uint64_t role) {
  return nn::detail::splitmix64(master ^ nn::detail::splitmix64(role));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Training with a learning curve

/// f2, f3 and conventional_f3 are NaN on cycles that were not evaluated.
struct CurvePoint {
  std::size_t cycle = 0;
  double loss = 0.0;
  double f2 = std::numeric_limits<double>::quiet_NaN();
  double f3 = std::numeric_limits<double>::quiet_NaN();
  double conventional_f3 = std::numeric_limits<double>::quiet_NaN();  // centroids from this cycle's training batch
};

struct TrainOptions {
  std::size_t n_per_state = 2048;
  std::size_t test_per_state = 2048;
  std::size_t eval_every = 1;  // 0 disables evaluation
  std::vector<State> states = {State::G, State::E, State::F};
  DriftState drift;
  BatchOptions batch_options;  // wait_jitter > 0 for phase-robust training
};

/// n_cycles of generate -> DSP -> train_cycle on fresh data. After each
/// evaluated update the model and a conventional classifier calibrated on
/// the same training batch are scored on a fresh test batch.
template <class T>
std::vector<CurvePoint> train_initial(nn::Model<T>& model, const Setup& setup,
                                      const nn::TrainConfig& cfg, std::size_t n_cycles,
                                      const TrainOptions& opts, Rng& rng) {
  setup.validate();
  std::vector<CurvePoint> curve;
  if (n_cycles == 0) return curve;
  const Downconverter ddc(setup.dsp, setup.acq.n_samples);
  for (std::size_t c = 0; c < n_cycles; ++c) {
    const IqBatch train = ddc(generate_batch(setup.device, setup.acq, opts.n_per_state,
                                             opts.states, opts.drift, rng,
                                             opts.batch_options));
    CurvePoint pt;
    pt.cycle = c + 1;
    pt.loss = nn::train_cycle(model, train, cfg);
    if (opts.eval_every && ((c + 1) % opts.eval_every == 0 || c + 1 == n_cycles)) {
      const IqBatch test = ddc(generate_batch(setup.device, setup.acq,
                                              opts.test_per_state, opts.states,
                                              opts.drift, rng, opts.batch_options));
      const Score s = score_classifier(test, model_classifier(model));
      pt.f2 = s.f2;
      pt.f3 = s.f3;
      pt.conventional_f3 =
          score_classifier(test, centroid_classifier(calibrate_centroids(train, opts.states)))
              .f3;
    }
    curve.push_back(pt);
  }
  return curve;
}

inline void write_curve_csv(std::ostream& os, std::span<const CurvePoint> curve) {
  os << "cycle,loss,f2,f3,conventional_f3\n" << std::setprecision(10);
  for (const auto& p : curve) {
    os << p.cycle << ',' << p.loss << ',';
    detail::put_number(os, p.f2);
    os << ',';
    detail::put_number(os, p.f3);
    os << ',';
    detail::put_number(os, p.conventional_f3);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Streaming run

struct FidelityRecord {
  double t = 0.0;
  Method method = Method::Baseline;
  double f2 = 0.0, f3 = 0.0;
  std::optional<double> loss;
  ConfusionMatrix cm;
};

struct FidelityLog {
  std::vector<FidelityRecord> records;

  std::vector<const FidelityRecord*> of(Method m) const {
    std::vector<const FidelityRecord*> out;
    for (const auto& r : records)
      if (r.method == m) out.push_back(&r);
    return out;
  }
  double mean_f3(Method m) const {
    double acc = 0.0;
    const auto rs = of(m);
    for (const auto* r : rs) acc += r->f3;
    return rs.empty() ? std::numeric_limits<double>::quiet_NaN()
                      : acc / static_cast<double>(rs.size());
  }
};

/// Columns: t_s,method,f2,f3,loss. Missing values are empty fields.
inline void write_fidelity_csv(std::ostream& os, const FidelityLog& log) {
  std::ostringstream buf;
  buf << std::setprecision(10);
  buf << "t_s,method,f2,f3,loss\n";
  for (const auto& r : log.records) {
    buf << r.t << ',' << method_name(r.method) << ',';
    detail::put_number(buf, r.f2);
    buf << ',';
    detail::put_number(buf, r.f3);
    buf << ',';
    if (r.loss) detail::put_number(buf, *r.loss);
    buf << '\n';
  }
  os << buf.str();
}

struct StreamStats {
  std::size_t produced = 0;
  std::size_t consumed = 0;
  std::size_t lost = 0;
  std::size_t duplicated = 0;
  std::size_t stalls = 0;              // paced producer found the buffer full
  std::size_t backpressure_waits = 0;  // unpaced producer waited on the buffer
  std::size_t retrains = 0;
  double wall_seconds = 0.0;
  double producer_busy_seconds = 0.0;
  double consumer_busy_seconds = 0.0;
  double max_flush_seconds = 0.0;
  std::size_t traces_per_flush = 0;

  double producer_rate() const {
    return producer_busy_seconds > 0
               ? static_cast<double>(produced * traces_per_flush) / producer_busy_seconds
               : 0.0;
  }
  double consumer_rate() const {
    return consumer_busy_seconds > 0
               ? static_cast<double>(consumed * traces_per_flush) / consumer_busy_seconds
               : 0.0;
  }
  double mean_flush_seconds() const {
    return consumed ? consumer_busy_seconds / static_cast<double>(consumed) : 0.0;
  }
};

struct RetrainEvent {
  double t = 0.0;
  std::vector<double> losses;
};

struct StreamResult {
  FidelityLog log;
  StreamStats stats;
  std::vector<RetrainEvent> retrains;
  std::vector<CurvePoint> initial_curve;
};

namespace detail {

struct Flush {
  std::size_t seq = 0;
  double t = 0.0;
  LabeledBatch batch;
};

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

/// Emulates the acquisition loop. A producer thread simulates one flush per
/// period and hands it over a bounded buffer; the consumer runs DSP, scores
/// every method on the identical flush, and retrains the CNN on schedule.
///
/// Randomness comes from independent per-role streams derived from `seed`
/// (producer, calibration, training), so the log does not depend on thread
/// timing. `model` may be pre-trained; otherwise schedule.initial_cycles run
/// before the stream starts.
template <class T>
StreamResult run_stream(const Setup& setup, const DriftScenario& scenario,
                        const TrainSchedule& schedule, const StreamConfig& cfg,
                        const nn::TrainConfig& train_cfg, nn::Model<T>* model,
                        std::uint64_t seed) {
  setup.validate();
  cfg.validate();
  schedule.validate();
  scenario.validate(cfg.run_duration);
  train_cfg.validate();
  const bool use_cnn = cfg.has(Method::Cnn);
  if (use_cnn && !model) throw ConfigError("cnn method enabled without a model");
  if (!use_cnn && schedule.trigger != RetrainTrigger::Never)
    throw ConfigError("schedule requests retraining but the cnn method is disabled");
  if (use_cnn && model->adam.step == 0 && schedule.initial_cycles == 0)
    throw ConfigError("cnn is untrained and the schedule has no initial training");

  StreamResult result;
  const Downconverter ddc(setup.dsp, setup.acq.n_samples);
  Rng calib_rng(detail::role_seed(seed, 2));
  Rng train_rng(detail::role_seed(seed, 3));

  TrainOptions topts;
  topts.n_per_state = cfg.batch_size;
  topts.test_per_state = cfg.batch_size;
  topts.states = cfg.states;
  topts.drift = scenario.at(0.0);
  topts.eval_every = 0;

  // t = 0: fixed baseline calibration and initial training.
  const Centroids fixed = calibrate_centroids(
      ddc(generate_batch(setup.device, setup.acq, cfg.batch_size, cfg.states,
                         scenario.at(0.0), calib_rng)),
      cfg.states);
  if (use_cnn && model->adam.step == 0)
    result.initial_curve =
        train_initial(*model, setup, train_cfg, schedule.initial_cycles, topts, train_rng);

  const std::size_t n_flushes = cfg.n_flushes();
  const double period = cfg.flush_period();
  BoundedQueue<detail::Flush> queue(cfg.buffer_depth);
  StreamStats& stats = result.stats;
  stats.traces_per_flush = cfg.batch_size * cfg.states.size();

  const auto wall0 = detail::Clock::now();
  std::exception_ptr producer_error;
  std::thread producer([&] {
    try {
      Rng rng(detail::role_seed(seed, 1));
      for (std::size_t k = 0; k < n_flushes; ++k) {
        detail::Flush f;
        f.seq = k;
        f.t = static_cast<double>(k) * period;
        const auto t0 = detail::Clock::now();
        f.batch = generate_batch(setup.device, setup.acq, cfg.batch_size, cfg.states,
                                 scenario.at(f.t), rng);
        stats.producer_busy_seconds += detail::seconds_since(t0);
        if (cfg.realtime) {
          // The buffer is ready once its acquisition window has elapsed.
          const double due = (f.t + cfg.acquisition_time()) / cfg.time_scale;
          std::this_thread::sleep_until(
              wall0 + std::chrono::duration_cast<detail::Clock::duration>(
                          std::chrono::duration<double>(due)));
        }
        const bool waited = queue.push(std::move(f));
        if (waited) ++(cfg.realtime ? stats.stalls : stats.backpressure_waits);
        ++stats.produced;
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  std::vector<double> retrain_times;
  if (schedule.trigger == RetrainTrigger::Interval)
    for (double t = schedule.interval; t < cfg.run_duration; t += schedule.interval)
      retrain_times.push_back(t);
  else if (schedule.trigger == RetrainTrigger::Manual)
    retrain_times = schedule.manual_times;
  std::sort(retrain_times.begin(), retrain_times.end());
  std::size_t next_retrain = 0;

  std::exception_ptr consumer_error;
  std::vector<bool> seen(n_flushes, false);
  try {
    while (auto item = queue.pop()) {
      const auto t0 = detail::Clock::now();
      detail::Flush f = std::move(*item);
      if (f.seq >= n_flushes || seen[f.seq]) {
        ++stats.duplicated;
        continue;
      }
      seen[f.seq] = true;
      const IqBatch iq = ddc(f.batch);
      for (Method m : cfg.methods) {
        FidelityRecord r;
        r.t = f.t;
        r.method = m;
        Score s;
        if (m == Method::Baseline) {
          s = score_classifier(iq, centroid_classifier(fixed));
        } else if (m == Method::CalBaseline) {
          s = score_classifier(iq, centroid_classifier(calibrate_centroids(iq, cfg.states)));
        } else {
          s = score_classifier(iq, model_classifier(*model));
          r.loss = model_test_loss(*model, iq);
        }
        r.f2 = s.f2;
        r.f3 = s.f3;
        r.cm = std::move(s.cm);
        result.log.records.push_back(std::move(r));
      }
      if (use_cnn && next_retrain < retrain_times.size() &&
          f.t + period > retrain_times[next_retrain]) {
        while (next_retrain < retrain_times.size() &&
               f.t + period > retrain_times[next_retrain])
          ++next_retrain;
        RetrainEvent ev;
        ev.t = f.t;
        topts.drift = scenario.at(f.t);
        for (const auto& p : train_initial(*model, setup, train_cfg,
                                           schedule.retrain_cycles, topts, train_rng))
          ev.losses.push_back(p.loss);
        result.retrains.push_back(std::move(ev));
        ++stats.retrains;
      }
      if (cfg.consumer_delay > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(cfg.consumer_delay));
      const double busy = detail::seconds_since(t0);
      stats.consumer_busy_seconds += busy;
      stats.max_flush_seconds = std::max(stats.max_flush_seconds, busy);
      ++stats.consumed;
    }
  } catch (...) {
    consumer_error = std::current_exception();
    queue.close();
  }
  producer.join();
  stats.wall_seconds = detail::seconds_since(wall0);
  if (consumer_error) std::rethrow_exception(consumer_error);
  if (producer_error) std::rethrow_exception(producer_error);
  for (bool s : seen)
    if (!s) ++stats.lost;
  return result;
}

// ---------------------------------------------------------------------------
// Phase sweep

struct SweepRow {
  double phase = 0.0;
  Method method = Method::Baseline;
  double f3 = 0.0;
};

struct SweepOptions {
  std::size_t n_points = 500;
  std::size_t n_per_state = 2048;
  std::vector<State> states = {State::G, State::E, State::F};
  // Reuse one seed for every phase point so points differ only in phase.
  bool common_random_numbers = true;
};

/// Scores the fixed-calibration baseline (centroids at phase 0) and the model
/// at n_points phases evenly spaced over [0, 2pi).
template <class T>
std::vector<SweepRow> phase_sweep(const nn::Model<T>& model, const Setup& setup,
                                  const SweepOptions& opts, std::uint64_t seed) {
  setup.validate();
  if (model.adam.step == 0) throw Error("phase_sweep: model is untrained");
  if (opts.n_points == 0) throw ConfigError("phase_sweep: n_points must be > 0");
  const Downconverter ddc(setup.dsp, setup.acq.n_samples);
  Rng calib_rng(detail::role_seed(seed, 2));
  const Centroids c0 = calibrate_centroids(
      ddc(generate_batch(setup.device, setup.acq, opts.n_per_state, opts.states, {},
                         calib_rng)),
      opts.states);
  Rng sweep_rng(detail::role_seed(seed, 5));
  const std::uint64_t shared = sweep_rng();
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < opts.n_points; ++k) {
    const double phase = kTwoPi * static_cast<double>(k) / static_cast<double>(opts.n_points);
    Rng rng(opts.common_random_numbers ? shared : sweep_rng());
    DriftState d;
    d.phase_offset = phase;
    const IqBatch iq =
        ddc(generate_batch(setup.device, setup.acq, opts.n_per_state, opts.states, d, rng));
    rows.push_back({phase, Method::Baseline,
                    score_classifier(iq, centroid_classifier(c0)).f3});
    rows.push_back({phase, Method::Cnn, score_classifier(iq, model_classifier(model)).f3});
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "phase_rad,method,f3\n" << std::setprecision(10);
  for (const auto& r : rows) os << r.phase << ',' << method_name(r.method) << ',' << r.f3 << '\n';
}

/// Peak-to-trough F3 of one method over a sweep.
inline double sweep_range(std::span<const SweepRow> rows, Method m) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows)
    if (r.method == m) {
      lo = std::min(lo, r.f3);
      hi = std::max(hi, r.f3);
    }
  return hi - lo;
}

// ---------------------------------------------------------------------------
// Throughput

struct ThroughputReport {
  double producer_traces_per_s = 0.0;
  double consumer_traces_per_s = 0.0;
  double sustained_traces_per_min = 0.0;
  std::size_t stalls = 0;
  double mean_flush_seconds = 0.0;
  double max_flush_seconds = 0.0;
};

inline ThroughputReport throughput_report(const StreamStats& s) {
  ThroughputReport r;
  r.producer_traces_per_s = s.producer_rate();
  r.consumer_traces_per_s = s.consumer_rate();
  r.sustained_traces_per_min =
      s.wall_seconds > 0
          ? 60.0 * static_cast<double>(s.consumed * s.traces_per_flush) / s.wall_seconds
          : 0.0;
  r.stalls = s.stalls;
  r.mean_flush_seconds = s.mean_flush_seconds();
  r.max_flush_seconds = s.max_flush_seconds;
  return r;
}

/// Runs a stream with the classical methods only and reports rates.
inline ThroughputReport throughput_report(const Setup& setup, StreamConfig cfg,
                                          std::uint64_t seed) {
  cfg.methods.erase(std::remove(cfg.methods.begin(), cfg.methods.end(), Method::Cnn),
                    cfg.methods.end());
  if (cfg.methods.empty()) cfg.methods = {Method::Baseline};
  TrainSchedule none;
  none.trigger = RetrainTrigger::Never;
  return throughput_report(run_stream<float>(setup, DriftScenario::none(), none, cfg,
                                             nn::TrainConfig{}, nullptr, seed)
                               .stats);
}

}  // namespace qreadout

#endif  // QREADOUT_STREAM_HPP_

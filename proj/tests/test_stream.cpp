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

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "qreadout/stream.hpp"

using namespace qreadout;

namespace {

// Short acquisition and small batches keep each stream to a fraction of a second.
Setup small_setup(double noise_sigma = 7.0) {
  Setup s;
  s.acq.noise_sigma = noise_sigma;
  return s;
}

StreamConfig small_stream(double duration = 50.0) {
  StreamConfig c;
  c.batch_size = 64;
  c.run_duration = duration;
  c.flush_interval = 5.0;
  c.methods = {Method::Baseline, Method::CalBaseline};
  return c;
}

TrainSchedule never() {
  TrainSchedule s;
  s.trigger = RetrainTrigger::Never;
  return s;
}

std::uint64_t total(const ConfusionMatrix& cm) {
  std::uint64_t n = 0;
  for (std::size_t j = 0; j < cm.states.size(); ++j) n += cm.row_sum(j);
  return n;
}

std::string csv(const StreamResult& r) {
  std::ostringstream os;
  write_fidelity_csv(os, r.log);
  return os.str();
}

}  // namespace

TEST(BoundedQueue, FifoAndClose) {
  BoundedQueue<int> q(2);
  EXPECT_FALSE(q.push(1));
  EXPECT_FALSE(q.push(2));
  EXPECT_EQ(q.size(), 2u);
  EXPECT_EQ(*q.pop(), 1);
  EXPECT_EQ(*q.pop(), 2);
  q.push(3);
  q.close();
  EXPECT_EQ(*q.pop(), 3);
  EXPECT_FALSE(q.pop().has_value());
  EXPECT_THROW(q.push(4), Error);
  EXPECT_THROW(BoundedQueue<int>(0), ConfigError);
}

TEST(BoundedQueue, ProducerBlocksWhenFull) {
  BoundedQueue<int> q(2);
  q.push(0);
  q.push(1);
  bool waited = false;
  std::thread t([&] { waited = q.push(2); });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_EQ(q.size(), 2u);
  EXPECT_EQ(*q.pop(), 0);
  t.join();
  EXPECT_TRUE(waited);
  EXPECT_EQ(*q.pop(), 1);
  EXPECT_EQ(*q.pop(), 2);
}

TEST(BoundedQueue, ManyItemsArriveOnceInOrder) {
  BoundedQueue<int> q(3);
  std::thread t([&] {
    for (int k = 0; k < 10000; ++k) q.push(k);
    q.close();
  });
  int expect = 0;
  while (auto v = q.pop()) EXPECT_EQ(*v, expect++);
  t.join();
  EXPECT_EQ(expect, 10000);
}

TEST(StreamConfig, FlushTiming) {
  StreamConfig c = small_stream(600.0);
  EXPECT_EQ(c.n_flushes(), 120u);
  c.flush_interval = 0.0;
  EXPECT_DOUBLE_EQ(c.flush_period(), c.acquisition_time());
  EXPECT_DOUBLE_EQ(c.acquisition_time(), 64 * 3 * 40e-6);
  c = StreamConfig{};
  c.run_duration = 1.0;
  EXPECT_EQ(c.n_flushes(), 1u);
}

TEST(StreamConfig, Validation) {
  StreamConfig c = small_stream();
  c.buffer_depth = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_stream();
  c.methods.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_stream();
  c.states = {State::G};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_stream();
  c.time_scale = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_method("knn"), ConfigError);
  EXPECT_EQ(parse_method("cal_baseline"), Method::CalBaseline);
}

TEST(DriftScenario, ComponentsCompose) {
  const auto d = DriftScenario::composite({DriftScenario::phase_linear(0.1),
                                           DriftScenario::phase_jump(10.0, 1.0),
                                           DriftScenario::gain_linear(0.01)});
  EXPECT_DOUBLE_EQ(d.at(5.0).phase_offset, 0.5);
  EXPECT_DOUBLE_EQ(d.at(10.0).phase_offset, 2.0);
  EXPECT_DOUBLE_EQ(d.at(20.0).amp_scale, 1.2);
  EXPECT_DOUBLE_EQ(DriftScenario::none().at(100.0).amp_scale, 1.0);
  const auto def = default_drift(600.0);
  EXPECT_NEAR(def.at(600.0).phase_offset, std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(def.at(600.0).amp_scale, 1.05, 1e-12);
  EXPECT_THROW(DriftScenario::gain_linear(-0.01).validate(200.0), ConfigError);
  EXPECT_NO_THROW(DriftScenario::gain_linear(-0.01).validate(50.0));
}

TEST(RunStream, EveryFlushScoredOnceAndNothingLost) {
  const auto r = run_stream<float>(small_setup(), DriftScenario::none(), never(),
                                   small_stream(), nn::TrainConfig{}, nullptr, 1);
  EXPECT_EQ(r.stats.produced, 10u);
  EXPECT_EQ(r.stats.consumed, 10u);
  EXPECT_EQ(r.stats.lost, 0u);
  EXPECT_EQ(r.stats.duplicated, 0u);
  EXPECT_EQ(r.stats.stalls, 0u);
  ASSERT_EQ(r.log.records.size(), 20u);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_DOUBLE_EQ(r.log.records[2 * k].t, 5.0 * static_cast<double>(k));
    EXPECT_EQ(r.log.records[2 * k].method, Method::Baseline);
    EXPECT_EQ(r.log.records[2 * k + 1].method, Method::CalBaseline);
    EXPECT_EQ(total(r.log.records[2 * k].cm), 192u);
  }
}

TEST(RunStream, NoiselessStreamIsPerfect) {
  qreadout::Setup s = small_setup(0.0);
  s.device.t1_e = std::numeric_limits<double>::infinity();
  s.device.t1_f = std::numeric_limits<double>::infinity();
  const auto r = run_stream<float>(s, DriftScenario::none(), never(), small_stream(),
                                   nn::TrainConfig{}, nullptr, 2);
  for (const auto& rec : r.log.records) {
    EXPECT_EQ(rec.f3, 1.0);
    EXPECT_EQ(rec.f2, 1.0);
  }
}

TEST(RunStream, IdenticalSeedsGiveIdenticalCsv) {
  auto run = [](std::uint64_t seed) {
    return csv(run_stream<float>(small_setup(), default_drift(50.0), never(), small_stream(),
                                 nn::TrainConfig{}, nullptr, seed));
  };
  const std::string a = run(7);
  EXPECT_EQ(a, run(7));
  EXPECT_NE(a, run(8));
  EXPECT_EQ(a.rfind("t_s,method,f2,f3,loss\n", 0), 0u);
}

TEST(RunStream, PhaseJumpHurtsOnlyFixedBaseline) {
  const auto r = run_stream<float>(small_setup(), DriftScenario::phase_jump(25.0, 1.5),
                                   never(), small_stream(), nn::TrainConfig{}, nullptr, 3);
  double before = 0, after = 0, cal_after = 0;
  for (const auto* rec : r.log.of(Method::Baseline)) (rec->t < 25.0 ? before : after) += rec->f3 / 5;
  for (const auto* rec : r.log.of(Method::CalBaseline))
    if (rec->t >= 25.0) cal_after += rec->f3 / 5;
  EXPECT_LT(after, before - 0.2);
  EXPECT_GT(cal_after, after + 0.2);
}

TEST(RunStream, BatchSizeOne) {
  StreamConfig c = small_stream(20.0);
  c.batch_size = 1;
  const auto r = run_stream<float>(small_setup(), DriftScenario::none(), never(), c,
                                   nn::TrainConfig{}, nullptr, 4);
  EXPECT_EQ(r.stats.consumed, 4u);
  for (const auto& rec : r.log.records) EXPECT_EQ(total(rec.cm), 3u);
}

TEST(RunStream, SlowConsumerStallsRealtimeProducer) {
  StreamConfig c = small_stream(10.0);
  c.flush_interval = 0.5;
  c.realtime = true;
  c.time_scale = 100.0;  // 5 ms per flush
  c.consumer_delay = 0.05;
  const auto r = run_stream<float>(small_setup(), DriftScenario::none(), never(), c,
                                   nn::TrainConfig{}, nullptr, 5);
  EXPECT_GT(r.stats.stalls, 0u);
  EXPECT_EQ(r.stats.lost, 0u);
  EXPECT_EQ(r.stats.consumed, 20u);
}

TEST(RunStream, ConfigErrors) {
  StreamConfig c = small_stream();
  c.methods.push_back(Method::Cnn);
  EXPECT_THROW(run_stream<float>(small_setup(), DriftScenario::none(), never(), c,
                                 nn::TrainConfig{}, nullptr, 1),
               ConfigError);
  TrainSchedule every;
  EXPECT_THROW(run_stream<float>(small_setup(), DriftScenario::none(), every, small_stream(),
                                 nn::TrainConfig{}, nullptr, 1),
               ConfigError);
  nn::Model<float> m(nn::desk_cnn(), 1);
  TrainSchedule none = never();
  none.initial_cycles = 0;
  EXPECT_THROW(run_stream<float>(small_setup(), DriftScenario::none(), none, c,
                                 nn::TrainConfig{}, &m, 1),
               ConfigError);
  qreadout::Setup bad = small_setup();
  bad.acq.sample_rate = 400e6;
  EXPECT_THROW(run_stream<float>(bad, DriftScenario::none(), never(), small_stream(),
                                 nn::TrainConfig{}, nullptr, 1),
               ConfigError);
}

TEST(RunStream, CnnRetrainsOnSchedule) {
  StreamConfig c = small_stream(30.0);
  c.methods = {Method::Baseline, Method::Cnn};
  TrainSchedule s;
  s.initial_cycles = 2;
  s.retrain_cycles = 1;
  s.interval = 10.0;
  nn::Model<float> m(nn::desk_cnn(), 1);
  const auto r = run_stream<float>(small_setup(), DriftScenario::none(), s, c,
                                   nn::TrainConfig{}, &m, 6);
  EXPECT_EQ(r.initial_curve.size(), 2u);
  EXPECT_EQ(r.stats.retrains, 2u);  // at 10 s and 20 s
  ASSERT_EQ(r.retrains.size(), 2u);
  EXPECT_DOUBLE_EQ(r.retrains[0].t, 10.0);  // first flush starting at or after 10 s
  EXPECT_EQ(r.retrains[0].losses.size(), 1u);
  for (const auto* rec : r.log.of(Method::Cnn)) EXPECT_TRUE(rec->loss.has_value());
  EXPECT_EQ(m.adam.step, 4u);
}

TEST(TrainInitial, ZeroCyclesGivesEmptyCurve) {
  nn::Model<float> m(nn::desk_cnn(), 1);
  Rng rng(1);
  EXPECT_TRUE(train_initial(m, small_setup(), nn::TrainConfig{}, 0, TrainOptions{}, rng).empty());
  EXPECT_EQ(m.adam.step, 0u);
}

TEST(TrainInitial, CurveColumns) {
  nn::Model<float> m(nn::desk_cnn(), 1);
  Rng rng(2);
  TrainOptions o;
  o.n_per_state = 32;
  o.test_per_state = 32;
  o.eval_every = 2;
  const auto curve = train_initial(m, small_setup(), nn::TrainConfig{}, 3, o, rng);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_TRUE(std::isnan(curve[0].f3));
  EXPECT_FALSE(std::isnan(curve[1].f3));
  EXPECT_FALSE(std::isnan(curve[2].conventional_f3));
  std::ostringstream os;
  write_curve_csv(os, curve);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(PhaseSweep, UntrainedModelRejected) {
  const nn::Model<float> m(nn::desk_cnn(), 1);
  EXPECT_THROW(phase_sweep(m, small_setup(), SweepOptions{}, 1), Error);
}

TEST(PhaseSweep, CommonRandomNumbersAndRange) {
  nn::Model<float> m(nn::desk_cnn(), 1);
  Rng rng(3);
  TrainOptions o;
  o.n_per_state = 32;
  o.eval_every = 0;
  train_initial(m, small_setup(0.0), nn::TrainConfig{}, 1, o, rng);
  SweepOptions so;
  so.n_points = 4;
  so.n_per_state = 64;
  qreadout::Setup quiet = small_setup(0.5);
  quiet.device.t1_e = quiet.device.t1_f = std::numeric_limits<double>::infinity();
  const auto rows = phase_sweep(m, quiet, so, 9);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_DOUBLE_EQ(rows[2].phase, std::numbers::pi / 2);
  // Fixed centroids are calibrated at phase 0, so a half turn scrambles them.
  EXPECT_GT(rows[0].f3, 0.95);
  EXPECT_LT(rows[4].f3, 0.5);
  EXPECT_GT(sweep_range(rows, Method::Baseline), 0.45);
  const auto again = phase_sweep(m, quiet, so, 9);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].f3, again[k].f3);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_EQ(os.str().rfind("phase_rad,method,f3\n", 0), 0u);
}

TEST(Throughput, ReportFromStats) {
  StreamStats s;
  s.consumed = 10;
  s.produced = 10;
  s.traces_per_flush = 100;
  s.wall_seconds = 2.0;
  s.consumer_busy_seconds = 1.0;
  s.producer_busy_seconds = 0.5;
  s.max_flush_seconds = 0.2;
  const auto r = throughput_report(s);
  EXPECT_DOUBLE_EQ(r.consumer_traces_per_s, 1000.0);
  EXPECT_DOUBLE_EQ(r.producer_traces_per_s, 2000.0);
  EXPECT_DOUBLE_EQ(r.sustained_traces_per_min, 30000.0);
  EXPECT_DOUBLE_EQ(r.mean_flush_seconds, 0.1);
}

TEST(RunStream, RetrainingFromCopiedModelIsReproducible) {
  StreamConfig c = small_stream(30.0);
  c.methods = {Method::Baseline, Method::Cnn};
  TrainSchedule s;
  s.initial_cycles = 0;
  s.retrain_cycles = 2;
  s.interval = 10.0;
  nn::Model<float> base(nn::desk_cnn(), 2);
  Rng rng(4);
  TrainOptions o;
  o.n_per_state = 64;
  o.eval_every = 0;
  train_initial(base, small_setup(), nn::TrainConfig{}, 2, o, rng);
  auto run = [&] {
    nn::Model<float> copy = base;
    return csv(run_stream<float>(small_setup(), default_drift(30.0), s, c, nn::TrainConfig{},
                                 &copy, 9));
  };
  const std::string a = run();
  for (int k = 0; k < 3; ++k) EXPECT_EQ(a, run());
}

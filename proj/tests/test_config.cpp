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

#include <filesystem>
#include <fstream>

#include "qreadout/config.hpp"

using namespace qreadout;
using nlohmann::json;

TEST(Presets, DeskDefaults) {
  const RunConfig c = desk_preset();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.cnn_architecture().input_length, 128u);
  EXPECT_EQ(c.cnn_architecture().conv1_kernel, 32u);
  EXPECT_EQ(c.cnn_architecture(true).conv1_kernel, 10u);
  EXPECT_EQ(c.stream.n_flushes(), 120u);
  EXPECT_EQ(c.n_classes(), 3u);
  EXPECT_EQ(c.setup().iq_length(), 128u);
}

TEST(Presets, PaperDefaults) {
  const RunConfig c = paper_preset();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.cnn_architecture().input_length, 512u);
  EXPECT_EQ(c.cnn_architecture().conv1_kernel, 128u);
  EXPECT_DOUBLE_EQ(c.stream.flush_period(), c.stream.acquisition_time());
  EXPECT_NEAR(c.drift.at(86400.0).phase_offset, std::numbers::pi / 2, 1e-12);
  EXPECT_THROW(preset_config("lab"), ConfigError);
}

TEST(Json, RoundTripReproducesConfig) {
  RunConfig c = desk_preset();
  c.seed = 99;
  c.states = {State::G, State::E};
  c.acq.noise_sigma = 5.5;
  c.dsp.window = Window::Hamming;
  c.stream.methods = {Method::Cnn};
  c.schedule.trigger = RetrainTrigger::Manual;
  c.schedule.manual_times = {10.0, 20.0};
  c.drift = DriftScenario::phase_jump(30.0, 0.5);
  const json j = config_to_json(c);
  RunConfig back = paper_preset();
  apply_json(back, j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.n_classes(), 2u);
  EXPECT_EQ(back.preset, "desk");
  EXPECT_EQ(back.drift.components.size(), 1u);
}

TEST(Json, PartialOverrideKeepsOtherFields) {
  RunConfig c = desk_preset();
  apply_json(c, json::parse(R"({"acq": {"noise_sigma": 3.0}, "stream": {"batch_size": 16}})"));
  EXPECT_EQ(c.acq.noise_sigma, 3.0);
  EXPECT_EQ(c.stream.batch_size, 16u);
  EXPECT_EQ(c.acq.n_samples, desk_preset().acq.n_samples);
  EXPECT_EQ(c.dsp.n_taps, 40u);
}

TEST(Json, PresetKeySwitchesBase) {
  RunConfig c = desk_preset();
  apply_json(c, json::parse(R"({"preset": "paper", "seed": 4})"));
  EXPECT_EQ(c.preset, "paper");
  EXPECT_EQ(c.dsp.decimation, 1u);
  EXPECT_EQ(c.seed, 4u);
}

TEST(Json, UnknownKeysRejectedWithPath) {
  RunConfig c = desk_preset();
  try {
    apply_json(c, json::parse(R"({"acq": {"noise_sigmaa": 3.0}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("noise_sigmaa"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_json(c, json::parse(R"({"extra": 1})")), ConfigError);
  EXPECT_THROW(apply_json(c, json::parse(R"({"acq": {"noise_sigma": "loud"}})")), ConfigError);
  EXPECT_THROW(apply_json(c, json::parse(R"({"drift": [{"kind": "wobble"}]})")), ConfigError);
  EXPECT_THROW(apply_json(c, json::parse("[1, 2]")), ConfigError);
  EXPECT_THROW(apply_json(c, json::parse(R"({"states": "gx"})")), ConfigError);
}

TEST(Validate, CatchesBadValues) {
  RunConfig c = desk_preset();
  c.n_per_state = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_preset();
  c.model.conv1_kernel = 200;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_preset();
  c.acq.noise_sigma = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_preset();
  c.train.learning_rate = -1e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = desk_preset();
  c.train.learning_rate = 0.0;
  EXPECT_NO_THROW(c.validate());
  c = desk_preset();
  c.drift = DriftScenario::gain_linear(-1.0);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(LoadConfig, FileErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string bad = (dir / "qreadout_bad_config.json").string();
  std::ofstream(bad) << "{ not json";
  EXPECT_THROW(load_config(bad, desk_preset()), ConfigError);
  std::filesystem::remove(bad);
  EXPECT_THROW(load_config((dir / "qreadout_missing.json").string(), desk_preset()), ConfigError);
  const std::string good = (dir / "qreadout_good_config.json").string();
  std::ofstream(good) << R"({"seed": 12})";
  EXPECT_EQ(load_config(good, desk_preset()).seed, 12u);
  std::filesystem::remove(good);
}

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

// A one-minute virtual stream under a phase jump: the fixed baseline drops
// at the jump while the per-batch recalibrated baseline does not.

#include <iostream>

#include "qreadout/qreadout.hpp"

int main() {
  using namespace qreadout;
  const RunConfig cfg = desk_preset();
  StreamConfig sc = cfg.stream;
  sc.run_duration = 60.0;
  sc.batch_size = 512;
  sc.methods = {Method::Baseline, Method::CalBaseline};
  TrainSchedule none;
  none.trigger = RetrainTrigger::Never;
  const auto result = run_stream<float>(cfg.setup(), DriftScenario::phase_jump(30.0, 1.2), none,
                                        sc, cfg.train, nullptr, 3);
  write_fidelity_csv(std::cout, result.log);
  const auto tp = throughput_report(result.stats);
  std::cerr << "consumer " << tp.consumer_traces_per_s << " traces/s, lost "
            << result.stats.lost << '\n';
}

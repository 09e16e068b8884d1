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

// Simulate a calibration and a test batch, downconvert them, and compare the
// classical classifiers.

#include <iomanip>
#include <iostream>

#include "qreadout/qreadout.hpp"

int main() {
  using namespace qreadout;
  const RunConfig cfg = desk_preset();
  const Setup setup = cfg.setup();
  const Downconverter ddc(setup.dsp, setup.acq.n_samples);

  Rng rng(2024);
  const IqBatch calib = ddc(generate_batch(setup.device, setup.acq, 1024, cfg.states, {}, rng));
  const IqBatch test = ddc(generate_batch(setup.device, setup.acq, 1024, cfg.states, {}, rng));

  const Score conv = score_classifier(test, centroid_classifier(calibrate_centroids(calib, cfg.states)));
  const Score mf = score_classifier(test, matched_classifier(build_matched_filters(calib, cfg.states)));
  const Score knn = score_classifier(test, knn_classifier(calib, cfg.model.knn_k));

  std::cout << std::fixed << std::setprecision(3) << "method          F2     F3\n"
            << "conventional    " << conv.f2 << "  " << conv.f3 << '\n'
            << "matched_filter  " << mf.f2 << "  " << mf.f3 << '\n'
            << "knn             " << knn.f2 << "  " << knn.f3 << '\n';
}

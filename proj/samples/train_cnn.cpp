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

// Train the desk CNN for a few cycles on fresh simulated batches, print the
// learning curve, and save a checkpoint.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <string>

#include "qreadout/qreadout.hpp"

int main(int argc, char** argv) {
  using namespace qreadout;
  const std::size_t cycles = argc > 1 ? std::stoul(argv[1]) : 20;
  const RunConfig cfg = desk_preset();
  nn::Model<float> model(cfg.cnn_architecture(), 1);
  Rng rng(7);
  TrainOptions opts;
  opts.eval_every = 5;
  const auto curve = train_initial(model, cfg.setup(), cfg.train, cycles, opts, rng);
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& p : curve)
    if (!std::isnan(p.f3))
      std::cout << "cycle " << std::setw(3) << p.cycle << "  loss " << p.loss << "  cnn F3 "
                << p.f3 << "  conventional F3 " << p.conventional_f3 << '\n';
  nn::save_checkpoint(model, "cnn_example.json");
  std::cout << "saved cnn_example.json\n";
}

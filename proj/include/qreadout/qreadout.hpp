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

#ifndef QREADOUT_QREADOUT_HPP_
#define QREADOUT_QREADOUT_HPP_

#include "qreadout/classifiers.hpp"
#include "qreadout/common.hpp"
#include "qreadout/config.hpp"
#include "qreadout/dsp.hpp"
#include "qreadout/evaluate.hpp"
#include "qreadout/nn/checkpoint.hpp"
#include "qreadout/nn/layers.hpp"
#include "qreadout/nn/model.hpp"
#include "qreadout/nn/tensor.hpp"
#include "qreadout/sim.hpp"
#include "qreadout/stream.hpp"
#include "qreadout/trace_io.hpp"

#endif  // QREADOUT_QREADOUT_HPP_

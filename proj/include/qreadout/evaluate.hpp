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

#ifndef QREADOUT_EVALUATE_HPP_
#define QREADOUT_EVALUATE_HPP_

#include <functional>
#include <limits>
#include <memory>

#include "qreadout/classifiers.hpp"
#include "qreadout/nn/model.hpp"

// Qubit fidelity F2 is measured on the |g>/|e> preparations only, with each
// classifier restricted to the outputs g and e. Qutrit fidelity F3 uses every
// preparation and output.

namespace qreadout {

struct Score {
  double f2 = std::numeric_limits<double>::quiet_NaN();
  double f3 = std::numeric_limits<double>::quiet_NaN();
  ConfusionMatrix cm;  // over the batch's full state set
};

inline constexpr std::array<State, 2> kQubitStates = {State::G, State::E};

inline std::vector<State> labels_of(const IqBatch& batch) {
  std::vector<State> out;
  out.reserve(batch.size());
  for (const auto& iq : batch) {
    if (!iq.label) throw Error("evaluation trace has no label");
    out.push_back(*iq.label);
  }
  return out;
}

/// Sorted set of labels present in a batch.
inline std::vector<State> states_present(const IqBatch& batch) {
  std::array<bool, 3> seen{};
  for (const auto& iq : batch)
    if (iq.label) seen[index(*iq.label)] = true;
  std::vector<State> out;
  for (State s : kAllStates)
    if (seen[index(s)]) out.push_back(s);
  return out;
}

/// Classifier interface for scoring: `classify(batch, allowed)` returns one
/// label per trace, choosing only among `allowed`.
using ClassifyFn =
    std::function<std::vector<State>(const IqBatch&, std::span<const State>)>;

inline Score score_classifier(const IqBatch& batch, const ClassifyFn& classify) {
  Score s;
  const auto truth = labels_of(batch);
  const auto states = states_present(batch);
  const auto pred = classify(batch, states);
  s.cm = confusion_matrix(pred, truth, states);
  const bool has_g = std::find(states.begin(), states.end(), State::G) != states.end();
  const bool has_e = std::find(states.begin(), states.end(), State::E) != states.end();
  if (states.size() == 3) s.f3 = assignment_fidelity(s.cm);
  if (has_g && has_e) {
    if (states.size() == 2) {
      s.f2 = assignment_fidelity(s.cm);
    } else {
      IqBatch ge;
      std::vector<State> ge_truth;
      for (std::size_t k = 0; k < batch.size(); ++k)
        if (truth[k] != State::F) {
          ge.push_back(batch[k]);
          ge_truth.push_back(truth[k]);
        }
      const auto ge_pred = classify(ge, kQubitStates);
      s.f2 = assignment_fidelity(confusion_matrix(ge_pred, ge_truth, kQubitStates));
    }
  }
  return s;
}

/// Centroid subset for the requested states.
inline Centroids restrict_centroids(const Centroids& c, std::span<const State> allowed) {
  Centroids out;
  for (std::size_t k = 0; k < c.states.size(); ++k)
    if (std::find(allowed.begin(), allowed.end(), c.states[k]) != allowed.end()) {
      out.states.push_back(c.states[k]);
      out.mean_point.push_back(c.mean_point[k]);
    }
  if (out.states.empty()) throw Error("no calibrated centroid among allowed states");
  return out;
}

inline MatchedFilterBank restrict_bank(const MatchedFilterBank& b,
                                       std::span<const State> allowed) {
  MatchedFilterBank out;
  out.statistic = b.statistic;
  for (std::size_t k = 0; k < b.states.size(); ++k)
    if (std::find(allowed.begin(), allowed.end(), b.states[k]) != allowed.end()) {
      out.states.push_back(b.states[k]);
      out.templates.push_back(b.templates[k]);
      out.energy.push_back(b.energy[k]);
    }
  if (out.states.empty()) throw Error("no matched filter among allowed states");
  return out;
}

inline ClassifyFn centroid_classifier(const Centroids& c) {
  return [c](const IqBatch& b, std::span<const State> allowed) {
    return classify_nearest(restrict_centroids(c, allowed), b);
  };
}

inline ClassifyFn matched_classifier(const MatchedFilterBank& bank) {
  return [bank](const IqBatch& b, std::span<const State> allowed) {
    return classify_matched(restrict_bank(bank, allowed), b);
  };
}

/// kNN restricted to `allowed` uses only reference traces with those labels.
inline ClassifyFn knn_classifier(const IqBatch& reference, std::size_t k) {
  auto full = std::make_shared<KnnClassifier>(reference, std::min(k, reference.size()));
  auto ref = std::make_shared<IqBatch>(reference);
  const auto all = states_present(reference);
  return [full, ref, all, k](const IqBatch& b, std::span<const State> allowed) {
    if (std::equal(all.begin(), all.end(), allowed.begin(), allowed.end()))
      return full->classify(b);
    IqBatch sub;
    for (const auto& r : *ref)
      if (std::find(allowed.begin(), allowed.end(), *r.label) != allowed.end())
        sub.push_back(r);
    return KnnClassifier(sub, std::min(k, sub.size())).classify(b);
  };
}

template <class T>
ClassifyFn model_classifier(const nn::Model<T>& model) {
  return [&model](const IqBatch& b, std::span<const State> allowed) {
    return nn::predict(model, b, allowed);
  };
}

/// Test-set MSE between softmax outputs and one-hot labels.
template <class T>
double model_test_loss(const nn::Model<T>& model, const IqBatch& batch) {
  const auto p = nn::predict_proba(model, batch);
  const std::size_t n = model.n_classes();
  double acc = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double target = nn::class_of(*batch[r].label, n) == c ? 1.0 : 0.0;
      const double d = static_cast<double>(p.at(r, c)) - target;
      acc += d * d;
    }
  return acc / static_cast<double>(batch.size() * n);
}

}  // namespace qreadout

#endif  // QREADOUT_EVALUATE_HPP_

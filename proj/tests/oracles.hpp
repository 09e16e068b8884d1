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

// Brute-force reference implementations shared by the unit tests and the
// acceptance run. Written independently of the library code paths.

#ifndef QREADOUT_TESTS_ORACLES_HPP_
#define QREADOUT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "qreadout/dsp.hpp"

namespace oracles {

using qreadout::cplx;
using qreadout::IqBatch;
using qreadout::IqTrace;
using qreadout::Rng;
using qreadout::State;
using qreadout::state_from_index;

inline IqTrace random_trace(Rng& rng, std::size_t len, State label) {
  std::normal_distribution<double> g(0.0, 1.0);
  IqTrace t;
  t.i.resize(len);
  t.q.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    t.i[n] = g(rng);
    t.q[n] = g(rng);
  }
  t.label = label;
  return t;
}

inline State oracle_matched(const std::vector<std::vector<cplx>>& tmpl, const IqTrace& x,
                            bool energy_biased) {
  std::size_t best = 0;
  double best_s = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < tmpl.size(); ++s) {
    cplx acc(0.0, 0.0);
    double e = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += std::conj(tmpl[s][n]) * cplx(x.i[n], x.q[n]);
      e += std::norm(tmpl[s][n]);
    }
    const double score = acc.real() - (energy_biased ? 0.5 * e : 0.0);
    if (score > best_s) {
      best_s = score;
      best = s;
    }
  }
  return state_from_index(best);
}

inline State oracle_knn(const IqBatch& ref, const IqTrace& x, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    double acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n)
      acc += std::pow(ref[r].i[n] - x.i[n], 2) + std::pow(ref[r].q[n] - x.q[n], 2);
    d.emplace_back(std::sqrt(acc), r);
  }
  std::sort(d.begin(), d.end());
  std::map<int, std::pair<int, double>> tally;  // label -> (votes, summed distance)
  for (std::size_t j = 0; j < k; ++j) {
    auto& t = tally[static_cast<int>(*ref[d[j].second].label)];
    ++t.first;
    t.second += d[j].first;
  }
  int best = -1;
  for (const auto& [label, t] : tally) {  // ascending label order
    if (best < 0) {
      best = label;
      continue;
    }
    const auto& b = tally[best];
    if (t.first > b.first || (t.first == b.first && t.second < b.second)) best = label;
  }
  return static_cast<State>(best);
}

/// Per-state mean traces, in state order.
inline std::vector<std::vector<cplx>> oracle_templates(const IqBatch& ref,
                                                       const std::vector<State>& states) {
  std::vector<std::vector<cplx>> out;
  for (State s : states) {
    std::vector<cplx> acc(ref.at(0).size());
    double n = 0;
    for (const auto& t : ref) {
      if (*t.label != s) continue;
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += cplx(t.i[k], t.q[k]);
      n += 1;
    }
    for (auto& v : acc) v /= n;
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace oracles

#endif  // QREADOUT_TESTS_ORACLES_HPP_

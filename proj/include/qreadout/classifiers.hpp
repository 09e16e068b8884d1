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

#ifndef QREADOUT_CLASSIFIERS_HPP_
#define QREADOUT_CLASSIFIERS_HPP_

#include <Eigen/Dense>

#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "qreadout/common.hpp"
#include "qreadout/dsp.hpp"

namespace qreadout {

namespace detail {

inline State require_label(const IqTrace& iq) {
  if (!iq.label) throw Error("calibration trace has no label");
  return *iq.label;
}

inline std::vector<State> sorted_states(std::span<const State> states) {
  std::vector<State> out(states.begin(), states.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ConfigError("classifier needs at least one state");
  return out;
}

inline void require_all_present(std::span<const State> states,
                                std::span<const std::size_t> counts,
                                const char* what) {
  std::string missing;
  for (State s : states)
    if (counts[index(s)] == 0) missing.push_back(state_char(s));
  if (!missing.empty())
    throw Error(std::string(what) + ": no calibration traces for state(s) " +
                missing);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Integrated-IQ centroid classification

/// Mean of i[n] + i*q[n] over the trace.
inline cplx integrate_trace(const IqTrace& iq) {
  if (iq.i.empty()) throw ShapeError("cannot integrate an empty trace");
  if (iq.q.size() != iq.i.size()) throw ShapeError("I and Q lengths differ");
  cplx acc(0.0, 0.0);
  for (std::size_t n = 0; n < iq.i.size(); ++n) acc += cplx(iq.i[n], iq.q[n]);
  return acc / static_cast<double>(iq.i.size());
}

struct Centroids {
  std::vector<State> states;  // ascending
  std::vector<cplx> mean_point;
};

inline Centroids calibrate_centroids(const IqBatch& batch,
                                     std::span<const State> states) {
  Centroids c;
  c.states = detail::sorted_states(states);
  std::array<cplx, 3> sum{};
  std::array<std::size_t, 3> count{};
  for (const IqTrace& iq : batch) {
    const State s = detail::require_label(iq);
    sum[index(s)] += integrate_trace(iq);
    ++count[index(s)];
  }
  detail::require_all_present(c.states, count, "calibrate_centroids");
  for (State s : c.states)
    c.mean_point.push_back(sum[index(s)] / static_cast<double>(count[index(s)]));
  return c;
}

/// Nearest centroid in the IQ plane; equal distances resolve to the lower
/// state (G < E < F).
inline State classify_nearest(const Centroids& c, cplx point) {
  if (c.states.empty()) throw Error("centroids are not calibrated");
  std::size_t best = 0;
  double best_d = std::norm(point - c.mean_point[0]);
  for (std::size_t k = 1; k < c.states.size(); ++k) {
    const double d = std::norm(point - c.mean_point[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return c.states[best];
}

inline std::vector<State> classify_nearest(const Centroids& c,
                                           const IqBatch& batch) {
  std::vector<State> out(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k)
    out[k] = classify_nearest(c, integrate_trace(batch[k]));
  return out;
}

// ---------------------------------------------------------------------------
// Matched filter

enum class MatchedStatistic {
  // Re<T, x> - |T|^2 / 2: the Gaussian-noise detection statistic. Equivalent
  // to picking the template nearest to x.
  EnergyBiased,
  // Re<T, x> alone. Favours high-energy templates when energies differ.
  Correlation,
};

struct MatchedFilterBank {
  std::vector<State> states;  // ascending
  std::vector<std::vector<cplx>> templates;
  std::vector<double> energy;
  MatchedStatistic statistic = MatchedStatistic::EnergyBiased;

  std::size_t length() const {
    return templates.empty() ? 0 : templates.front().size();
  }
};

/// Per-state mean trajectory.
inline MatchedFilterBank build_matched_filters(
    const IqBatch& batch, std::span<const State> states,
    MatchedStatistic statistic = MatchedStatistic::EnergyBiased) {
  MatchedFilterBank bank;
  bank.statistic = statistic;
  bank.states = detail::sorted_states(states);
  if (batch.empty()) throw Error("build_matched_filters: empty batch");
  const std::size_t len = batch.front().size();
  std::array<std::vector<cplx>, 3> sum;
  for (auto& v : sum) v.assign(len, cplx(0.0, 0.0));
  std::array<std::size_t, 3> count{};
  for (const IqTrace& iq : batch) {
    const State s = detail::require_label(iq);
    if (iq.size() != len || iq.q.size() != len)
      throw ShapeError("build_matched_filters: trace lengths differ");
    auto& acc = sum[index(s)];
    for (std::size_t n = 0; n < len; ++n) acc[n] += cplx(iq.i[n], iq.q[n]);
    ++count[index(s)];
  }
  detail::require_all_present(bank.states, count, "build_matched_filters");
  for (State s : bank.states) {
    std::vector<cplx> t = sum[index(s)];
    const double inv = 1.0 / static_cast<double>(count[index(s)]);
    double e = 0.0;
    for (auto& v : t) {
      v *= inv;
      e += std::norm(v);
    }
    bank.templates.push_back(std::move(t));
    bank.energy.push_back(e);
  }
  return bank;
}

inline std::vector<double> matched_scores(const MatchedFilterBank& bank,
                                          const IqTrace& iq) {
  if (bank.templates.empty()) throw Error("matched filter bank is empty");
  if (iq.size() != bank.length() || iq.q.size() != bank.length())
    throw ShapeError("matched filter expects traces of length " +
                     std::to_string(bank.length()) + ", got " +
                     std::to_string(iq.size()));
  std::vector<double> scores(bank.states.size());
  for (std::size_t s = 0; s < bank.states.size(); ++s) {
    const auto& t = bank.templates[s];
    double acc = 0.0;
    // Re[conj(t) * x] = t.re * x.re + t.im * x.im
    for (std::size_t n = 0; n < t.size(); ++n)
      acc += t[n].real() * iq.i[n] + t[n].imag() * iq.q[n];
    if (bank.statistic == MatchedStatistic::EnergyBiased)
      acc -= 0.5 * bank.energy[s];
    scores[s] = acc;
  }
  return scores;
}

/// Highest score wins; ties resolve to the lower state.
inline State classify_matched(const MatchedFilterBank& bank, const IqTrace& iq) {
  const auto scores = matched_scores(bank, iq);
  std::size_t best = 0;
  for (std::size_t s = 1; s < scores.size(); ++s)
    if (scores[s] > scores[best]) best = s;
  return bank.states[best];
}

inline std::vector<State> classify_matched(const MatchedFilterBank& bank,
                                           const IqBatch& batch) {
  std::vector<State> out(batch.size());
  parallel_for(batch.size(), [&](std::size_t k) {
    out[k] = classify_matched(bank, batch[k]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// k nearest neighbours over whole trajectories

namespace detail {

struct Neighbour {
  double dist;
  std::size_t index;
  State label;
};

// Majority label among the k nearest; ties go to the smallest summed
// distance, then to the lower state.
inline State vote(std::vector<Neighbour>& nb, std::size_t k) {
  std::partial_sort(nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(k),
                    nb.end(), [](const Neighbour& a, const Neighbour& b) {
                      return a.dist < b.dist ||
                             (a.dist == b.dist && a.index < b.index);
                    });
  std::array<std::size_t, 3> votes{};
  std::array<double, 3> dist_sum{};
  for (std::size_t j = 0; j < k; ++j) {
    ++votes[index(nb[j].label)];
    dist_sum[index(nb[j].label)] += nb[j].dist;
  }
  std::size_t best = 3;
  for (std::size_t s = 0; s < 3; ++s) {
    if (votes[s] == 0) continue;
    if (best == 3 || votes[s] > votes[best] ||
        (votes[s] == votes[best] && dist_sum[s] < dist_sum[best]))
      best = s;
  }
  return state_from_index(best);
}

inline double trace_distance(const IqTrace& a, const IqTrace& b) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double di = a.i[n] - b.i[n];
    const double dq = a.q[n] - b.q[n];
    acc += di * di + dq * dq;
  }
  return std::sqrt(acc);
}

}  // namespace detail

/// Euclidean distance over the concatenated (I, Q) samples.
inline State knn_classify(const IqBatch& reference, const IqTrace& iq,
                          std::size_t k) {
  if (reference.empty()) throw Error("knn_classify: empty reference set");
  if (k == 0 || k > reference.size())
    throw ConfigError("knn_classify: k must lie in [1, " +
                      std::to_string(reference.size()) + "]");
  std::vector<detail::Neighbour> nb;
  nb.reserve(reference.size());
  for (std::size_t r = 0; r < reference.size(); ++r) {
    if (reference[r].size() != iq.size())
      throw ShapeError("knn_classify: trace lengths differ");
    nb.push_back({detail::trace_distance(reference[r], iq), r,
                  detail::require_label(reference[r])});
  }
  return detail::vote(nb, k);
}

/// Batch kNN. Distances come from one matrix product per query block
/// (|a|^2 + |b|^2 - 2 a.b), which is what makes 6k x 6k reference sets cheap.
class KnnClassifier {
 public:
  KnnClassifier(const IqBatch& reference, std::size_t k) : k_(k) {
    if (reference.empty()) throw Error("KnnClassifier: empty reference set");
    if (k == 0 || k > reference.size())
      throw ConfigError("KnnClassifier: k must lie in [1, " +
                        std::to_string(reference.size()) + "]");
    dim_ = 2 * reference.front().size();
    ref_ = pack(reference);
    norms_ = ref_.colwise().squaredNorm().transpose();
    labels_.reserve(reference.size());
    for (const auto& r : reference) labels_.push_back(detail::require_label(r));
  }

  std::size_t k() const { return k_; }

  std::vector<State> classify(const IqBatch& queries) const {
    std::vector<State> out(queries.size());
    constexpr std::size_t kBlock = 256;
    const std::size_t n_blocks = (queries.size() + kBlock - 1) / kBlock;
    parallel_for(n_blocks, [&](std::size_t b) {
      const std::size_t lo = b * kBlock;
      const std::size_t hi = std::min(queries.size(), lo + kBlock);
      IqBatch block(queries.begin() + static_cast<std::ptrdiff_t>(lo),
                    queries.begin() + static_cast<std::ptrdiff_t>(hi));
      const Eigen::MatrixXd q = pack(block);
      const Eigen::VectorXd qn = q.colwise().squaredNorm().transpose();
      const Eigen::MatrixXd cross = ref_.transpose() * q;  // n_ref x n_q
      std::vector<detail::Neighbour> nb(labels_.size());
      for (std::size_t j = 0; j < hi - lo; ++j) {
        for (std::size_t r = 0; r < labels_.size(); ++r) {
          const auto ri = static_cast<Eigen::Index>(r);
          const auto ji = static_cast<Eigen::Index>(j);
          const double d2 = norms_(ri) + qn(ji) - 2.0 * cross(ri, ji);
          nb[r] = {std::sqrt(std::max(d2, 0.0)), r, labels_[r]};
        }
        out[lo + j] = detail::vote(nb, k_);
      }
    });
    return out;
  }

 private:
  Eigen::MatrixXd pack(const IqBatch& batch) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dim_),
                      static_cast<Eigen::Index>(batch.size()));
    const std::size_t half = dim_ / 2;
    for (std::size_t c = 0; c < batch.size(); ++c) {
      if (2 * batch[c].size() != dim_)
        throw ShapeError("KnnClassifier: trace lengths differ");
      const auto ci = static_cast<Eigen::Index>(c);
      for (std::size_t n = 0; n < half; ++n) {
        m(static_cast<Eigen::Index>(n), ci) = batch[c].i[n];
        m(static_cast<Eigen::Index>(half + n), ci) = batch[c].q[n];
      }
    }
    return m;
  }

  std::size_t k_;
  std::size_t dim_ = 0;
  Eigen::MatrixXd ref_;
  Eigen::VectorXd norms_;
  std::vector<State> labels_;
};

// ---------------------------------------------------------------------------
// Confusion matrix and assignment fidelity

/// counts[j][i]: prepared states[j], assigned states[i].
struct ConfusionMatrix {
  std::vector<State> states;
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t row_sum(std::size_t j) const {
    return std::accumulate(counts[j].begin(), counts[j].end(), std::uint64_t{0});
  }
  double probability(std::size_t assigned, std::size_t prepared) const {
    return static_cast<double>(counts[prepared][assigned]) /
           static_cast<double>(row_sum(prepared));
  }
};

inline ConfusionMatrix confusion_matrix(std::span<const State> pred,
                                        std::span<const State> truth,
                                        std::span<const State> states) {
  if (pred.size() != truth.size())
    throw ShapeError("confusion_matrix: " + std::to_string(pred.size()) +
                     " predictions for " + std::to_string(truth.size()) +
                     " labels");
  ConfusionMatrix cm;
  cm.states = detail::sorted_states(states);
  const std::size_t n = cm.states.size();
  cm.counts.assign(n, std::vector<std::uint64_t>(n, 0));
  std::array<std::ptrdiff_t, 3> pos{-1, -1, -1};
  for (std::size_t k = 0; k < n; ++k)
    pos[index(cm.states[k])] = static_cast<std::ptrdiff_t>(k);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const auto j = pos[index(truth[k])];
    const auto i = pos[index(pred[k])];
    if (j < 0 || i < 0)
      throw Error("confusion_matrix: label outside the state set " +
                  states_string(cm.states));
    ++cm.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
  return cm;
}

/// F_a = (1/N) sum_i P(i|i).
inline double assignment_fidelity(const ConfusionMatrix& cm) {
  if (cm.states.empty()) throw Error("assignment_fidelity: empty matrix");
  double acc = 0.0;
  for (std::size_t j = 0; j < cm.states.size(); ++j) {
    if (cm.row_sum(j) == 0)
      throw Error(std::string("assignment_fidelity: no shots prepared in |") +
                  state_char(cm.states[j]) + ">");
    acc += cm.probability(j, j);
  }
  return acc / static_cast<double>(cm.states.size());
}

/// One row of a confusion/fidelity CSV.
struct ConfusionRecord {
  std::string method;
  double timestamp_s = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  ConfusionMatrix cm;
};

/// Header: method,timestamp_s,f2,f3,c00,c01,... (row-major, N^2 counts).
inline void write_confusion_csv(std::ostream& os,
                                std::span<const ConfusionRecord> rows) {
  std::size_t n = 0;
  for (const auto& r : rows) n = std::max(n, r.cm.states.size());
  os << "method,timestamp_s,f2,f3";
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) os << ",c" << j << i;
  os << '\n';
  for (const auto& r : rows) {
    os << r.method << ',' << std::setprecision(10) << r.timestamp_s << ','
       << std::setprecision(6) << std::fixed << r.f2 << ',' << r.f3
       << std::defaultfloat;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        os << ','
           << ((j < r.cm.counts.size() && i < r.cm.counts[j].size())
                   ? r.cm.counts[j][i]
                   : 0);
    os << '\n';
  }
}

}  // namespace qreadout

#endif  // QREADOUT_CLASSIFIERS_HPP_

// Copyright 2026 The dpvote Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPVOTE_BALLOTS_H_
#define DPVOTE_BALLOTS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dpvote {

// One multi-label election: n voters, k labels, binary approval ballots.
class BallotMatrix {
 public:
  BallotMatrix(int voters, int labels)
      : n_(voters), k_(labels), bits_(static_cast<std::size_t>(voters) * labels, 0) {
    if (voters < 1 || labels < 1) {
      throw std::invalid_argument("BallotMatrix: need voters >= 1, labels >= 1");
    }
  }

  static BallotMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty()) {
      throw std::invalid_argument("BallotMatrix: empty rows");
    }
    BallotMatrix m(static_cast<int>(rows.size()),
                   static_cast<int>(rows.front().size()));
    for (int j = 0; j < m.n_; ++j) {
      if (static_cast<int>(rows[j].size()) != m.k_) {
        throw std::invalid_argument("BallotMatrix: ragged rows");
      }
      for (int i = 0; i < m.k_; ++i) m.set(j, i, rows[j][i]);
    }
    return m;
  }

  int voters() const { return n_; }
  int labels() const { return k_; }

  std::uint8_t at(int voter, int label) const {
    return bits_[static_cast<std::size_t>(voter) * k_ + label];
  }

  void set(int voter, int label, int value) {
    if (value != 0 && value != 1) {
      throw std::invalid_argument("BallotMatrix: entries must be 0/1");
    }
    bits_[static_cast<std::size_t>(voter) * k_ + label] =
        static_cast<std::uint8_t>(value);
  }

  // V^1_i: number of positive votes per label.
  std::vector<int> positive_counts() const {
    std::vector<int> counts(k_, 0);
    for (int j = 0; j < n_; ++j) {
      for (int i = 0; i < k_; ++i) counts[i] += at(j, i);
    }
    return counts;
  }

  std::vector<std::uint8_t> row(int voter) const {
    std::vector<std::uint8_t> r(k_);
    for (int i = 0; i < k_; ++i) r[i] = at(voter, i);
    return r;
  }

  bool operator==(const BallotMatrix& other) const {
    return n_ == other.n_ && k_ == other.k_ && bits_ == other.bits_;
  }

 private:
  int n_;
  int k_;
  std::vector<std::uint8_t> bits_;
};

enum class ClipNorm { kL1, kL2 };

// Ballots after per-row norm clipping: v_j = min(1, tau/||b_j||) * b_j.
struct ClippedBallots {
  int voters = 0;
  int labels = 0;
  double tau = 0.0;
  ClipNorm norm = ClipNorm::kL2;
  std::vector<double> values;  // row-major

  double at(int voter, int label) const {
    return values[static_cast<std::size_t>(voter) * labels + label];
  }

  std::vector<double> positive_counts() const {
    std::vector<double> counts(labels, 0.0);
    for (int j = 0; j < voters; ++j) {
      for (int i = 0; i < labels; ++i) counts[i] += at(j, i);
    }
    return counts;
  }
};

inline ClippedBallots clip(const BallotMatrix& ballots, double tau,
                           ClipNorm norm) {
  if (!(tau > 0.0)) throw std::invalid_argument("clip: tau must be > 0");
  ClippedBallots out;
  out.voters = ballots.voters();
  out.labels = ballots.labels();
  out.tau = tau;
  out.norm = norm;
  out.values.resize(static_cast<std::size_t>(out.voters) * out.labels, 0.0);
  for (int j = 0; j < out.voters; ++j) {
    double magnitude = 0.0;
    for (int i = 0; i < out.labels; ++i) magnitude += ballots.at(j, i);
    // Rows are 0/1, so the l1 norm is the popcount and the l2 norm its root.
    if (norm == ClipNorm::kL2) magnitude = std::sqrt(magnitude);
    const double scale = magnitude > 0.0 && magnitude > tau ? tau / magnitude : 1.0;
    for (int i = 0; i < out.labels; ++i) {
      out.values[static_cast<std::size_t>(j) * out.labels + i] =
          scale * ballots.at(j, i);
    }
  }
  return out;
}

// Per-label two-bin histogram; counts are real-valued once clipping enters.
struct LabelHistogram {
  double v0 = 0.0;  // negative bin, n - v1
  double v1 = 0.0;  // positive bin
};

// Sparse histogram over cast outcomes only. Uncast outcomes are not
// representable, which is exactly the Powerset reachability property.
struct PowersetHistogram {
  std::map<std::vector<std::uint8_t>, int> counts;

  std::vector<double> sorted_counts_desc() const {
    std::vector<double> c;
    c.reserve(counts.size());
    for (const auto& [outcome, count] : counts) c.push_back(count);
    std::sort(c.begin(), c.end(), std::greater<double>());
    return c;
  }
};

inline PowersetHistogram powerset_histogram(const BallotMatrix& ballots) {
  PowersetHistogram hist;
  for (int j = 0; j < ballots.voters(); ++j) ++hist.counts[ballots.row(j)];
  return hist;
}

// Per-label majority with a common threshold: bit i = 1 iff V^1_i > T.
// Exact equality releases 0, matching the mechanisms' tie rule.
inline std::vector<std::uint8_t> deterministic_election(
    const BallotMatrix& ballots, double threshold) {
  const std::vector<int> counts = ballots.positive_counts();
  std::vector<std::uint8_t> winners(ballots.labels(), 0);
  for (int i = 0; i < ballots.labels(); ++i) {
    winners[i] = counts[i] > threshold ? 1 : 0;
  }
  return winners;
}

}  // namespace dpvote

#endif  // DPVOTE_BALLOTS_H_

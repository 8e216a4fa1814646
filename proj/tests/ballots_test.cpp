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

#include "dpvote/ballots.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpvote/rng.hpp"

namespace {

using dpvote::BallotMatrix;
using dpvote::clip;
using dpvote::ClipNorm;
using dpvote::ClippedBallots;
using dpvote::deterministic_election;
using dpvote::powerset_histogram;
using dpvote::PowersetHistogram;

double row_norm(const ClippedBallots& c, int voter) {
  double acc = 0.0;
  for (int i = 0; i < c.labels; ++i) {
    const double v = c.at(voter, i);
    acc += c.norm == ClipNorm::kL2 ? v * v : std::abs(v);
  }
  return c.norm == ClipNorm::kL2 ? std::sqrt(acc) : acc;
}

TEST(BallotMatrix, FromRowsRoundTrip) {
  const BallotMatrix m =
      BallotMatrix::from_rows({{1, 0, 1}, {0, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(m.voters(), 3);
  EXPECT_EQ(m.labels(), 3);
  EXPECT_EQ(m.at(0, 2), 1);
  EXPECT_EQ(m.at(1, 1), 0);
  EXPECT_EQ(m.row(2), (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(m.positive_counts(), (std::vector<int>{2, 1, 2}));
  EXPECT_TRUE(m == BallotMatrix::from_rows({{1, 0, 1}, {0, 0, 0}, {1, 1, 1}}));
}

TEST(BallotMatrix, RejectsMalformedInput) {
  EXPECT_THROW(BallotMatrix(0, 3), std::invalid_argument);
  EXPECT_THROW(BallotMatrix(3, 0), std::invalid_argument);
  EXPECT_THROW(BallotMatrix::from_rows({}), std::invalid_argument);
  EXPECT_THROW(BallotMatrix::from_rows({{1, 0}, {1}}), std::invalid_argument);
  EXPECT_THROW(BallotMatrix::from_rows({{1, 2}}), std::invalid_argument);
  BallotMatrix m(1, 1);
  EXPECT_THROW(m.set(0, 0, -1), std::invalid_argument);
}

TEST(Clip, HandWorkedRows) {
  // Full approval row, l2: ||(1,1,1,1)|| = 2, tau = 1 scales to 0.5 each.
  const ClippedBallots l2 =
      clip(BallotMatrix::from_rows({{1, 1, 1, 1}}), 1.0, ClipNorm::kL2);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(l2.at(0, i), 0.5);

  // Row already inside the ball is untouched under either norm.
  const BallotMatrix single = BallotMatrix::from_rows({{1, 0, 0}});
  for (ClipNorm norm : {ClipNorm::kL1, ClipNorm::kL2}) {
    const ClippedBallots c = clip(single, 2.0, norm);
    EXPECT_DOUBLE_EQ(c.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(c.at(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(c.at(0, 2), 0.0);
  }

  // l1 clipping divides by the approval count.
  const ClippedBallots l1 =
      clip(BallotMatrix::from_rows({{1, 1, 1}}), 1.0, ClipNorm::kL1);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(l1.at(0, i), 1.0 / 3.0);

  // All-abstain rows stay zero instead of dividing by zero.
  const ClippedBallots zero =
      clip(BallotMatrix::from_rows({{0, 0}}), 0.5, ClipNorm::kL2);
  EXPECT_DOUBLE_EQ(zero.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(zero.at(0, 1), 0.0);

  EXPECT_THROW(clip(single, 0.0, ClipNorm::kL2), std::invalid_argument);
  EXPECT_THROW(clip(single, -1.0, ClipNorm::kL1), std::invalid_argument);
}

TEST(Clip, RowsLandInsideTheBallAndStayThere) {
  // Random 0/1 matrices: every clipped row has norm <= tau, rows already
  // inside are bit-identical, and re-clipping would be the identity.
  dpvote::StreamRng rng(dpvote::derive_key(7, 0, 0, dpvote::Purpose::kTrial));
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 6);
    const int k = 1 + static_cast<int>(rng.uniform() * 6);
    BallotMatrix m(n, k);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < k; ++i) m.set(j, i, rng.bernoulli(0.5) ? 1 : 0);
    }
    for (ClipNorm norm : {ClipNorm::kL1, ClipNorm::kL2}) {
      const double tau =  0.25 + 3.0 * rng.uniform();
      const ClippedBallots c = clip(m, tau, norm);
      for (int j = 0; j < n; ++j) {
        double raw = 0.0;
        for (int i = 0; i < k; ++i) raw += m.at(j, i);
        if (norm == ClipNorm::kL2) raw = std::sqrt(raw);
        const double clipped = row_norm(c, j);
        EXPECT_LE(clipped, tau * (1.0 + 1e-12));
        EXPECT_NEAR(clipped, std::min(raw, tau), 1e-12);
        if (raw <= tau) {
          for (int i = 0; i < k; ++i) {
            EXPECT_DOUBLE_EQ(c.at(j, i), static_cast<double>(m.at(j, i)));
          }
        }
        // Idempotence: a second clip pass would apply scale 1 everywhere.
        EXPECT_DOUBLE_EQ(std::min(1.0, tau / std::max(clipped, 1e-300)), 1.0);
      }
    }
  }
}

TEST(Clip, MassIsMonotoneInTau) {
  const BallotMatrix m = BallotMatrix::from_rows(
      {{1, 1, 1, 0}, {1, 0, 0, 0}, {1, 1, 1, 1}, {0, 1, 1, 0}});
  for (ClipNorm norm : {ClipNorm::kL1, ClipNorm::kL2}) {
    std::vector<double> last(4, 0.0);
    for (double tau = 0.25; tau <= 4.01; tau += 0.25) {
      const std::vector<double> counts = clip(m, tau, norm).positive_counts();
      for (int i = 0; i < 4; ++i) {
        EXPECT_GE(counts[i] + 1e-12, last[i]);
      }
      last = counts;
    }
    // Past the widest row norm the clip is the identity.
    EXPECT_EQ(last, (std::vector<double>{3.0, 3.0, 3.0, 1.0}));
  }
}

TEST(PowersetHistogram, CountsCastRowsOnly) {
  const BallotMatrix m =
      BallotMatrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {1, 0}});
  const PowersetHistogram hist = powerset_histogram(m);
  EXPECT_EQ(hist.counts.size(), 2u);
  EXPECT_EQ(hist.counts.at({1, 0}), 3);
  EXPECT_EQ(hist.counts.at({0, 1}), 1);
  EXPECT_EQ(hist.counts.count({1, 1}), 0u);
  EXPECT_EQ(hist.sorted_counts_desc(), (std::vector<double>{3.0, 1.0}));
}

TEST(DeterministicElection, ThresholdFixtures) {
  // Counts (2, 1) against T = 1.5: only the first label clears it.
  const BallotMatrix m = BallotMatrix::from_rows({{1, 0}, {1, 1}, {0, 0}});
  EXPECT_EQ(deterministic_election(m, 1.5),
            (std::vector<std::uint8_t>{1, 0}));

  // Unanimous approval clears any threshold below n.
  const BallotMatrix unanimous =
      BallotMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
  EXPECT_EQ(deterministic_election(unanimous, 2.5),
            (std::vector<std::uint8_t>{1, 1}));

  // Exact equality is a refusal to elect, matching the mechanisms' tie rule.
  const BallotMatrix tie = BallotMatrix::from_rows({{1}, {1}});
  EXPECT_EQ(deterministic_election(tie, 2.0), (std::vector<std::uint8_t>{0}));
  EXPECT_EQ(deterministic_election(tie, 1.9), (std::vector<std::uint8_t>{1}));
}

}  // namespace

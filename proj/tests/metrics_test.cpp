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

#include "dpvote/metrics.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpvote/rng.hpp"

namespace {

using dpvote::accuracy;
using dpvote::auc;
using dpvote::average_precision;
using dpvote::balanced_accuracy;
using dpvote::ConfusionCounts;
using dpvote::macro_mean;
using dpvote::Metric;
using dpvote::MetricReport;
using dpvote::score_released;

ConfusionCounts counts_from(const std::vector<int>& pred,
                            const std::vector<int>& truth) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && truth[i]) ++c.tp;
    if (pred[i] && !truth[i]) ++c.fp;
    if (!pred[i] && truth[i]) ++c.fn;
    if (!pred[i] && !truth[i]) ++c.tn;
  }
  return c;
}

// Exhaustive pairwise comparison fraction; the rank formula must match it.
double brute_force_auc(const std::vector<double>& scores,
                       const std::vector<std::uint8_t>& truth) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!truth[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

TEST(Accuracy, Fixtures) {
  EXPECT_DOUBLE_EQ(*accuracy(counts_from({1, 1, 0, 0}, {1, 1, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(*accuracy(counts_from({1, 1, 0, 0}, {1, 0, 1, 0})), 0.5);
  EXPECT_FALSE(accuracy(ConfusionCounts{}).has_value());
}

TEST(BalancedAccuracy, Fixtures) {
  EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from({1, 1, 0, 0}, {1, 0, 1, 0})),
                   0.5);
  EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from({1, 0, 1, 0}, {1, 0, 1, 0})),
                   1.0);
  // The constant-1 predictor on a balanced truth is exactly 1/2.
  EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from({1, 1, 1, 1}, {1, 0, 1, 0})),
                   0.5);
  // Single-class truth: the defined half stands alone.
  EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from({1, 0}, {1, 1})), 0.5);
  EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from({0, 0}, {0, 0})), 1.0);
  EXPECT_FALSE(balanced_accuracy(ConfusionCounts{}).has_value());
}

TEST(BalancedAccuracy, ConstantPredictorIsExactlyHalf) {
  // Any constant predictor on a two-class truth scores exactly 0.5: one of
  // recall/specificity is 1 and the other 0, with no rounding involved.
  for (int bit : {0, 1}) {
    for (int pos = 1; pos <= 5; ++pos) {
      std::vector<int> pred(6, bit);
      std::vector<int> truth(6, 0);
      for (int i = 0; i < pos; ++i) truth[i] = 1;
      EXPECT_DOUBLE_EQ(*balanced_accuracy(counts_from(pred, truth)), 0.5);
    }
  }
}

TEST(Auc, Fixtures) {
  EXPECT_DOUBLE_EQ(*auc({0.1, 0.9}, {0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(*auc({0.9, 0.1}, {0, 1}), 0.0);
  // Positives at .9 and .4 against a negative at .6: one win, one loss.
  EXPECT_DOUBLE_EQ(*auc({0.9, 0.4, 0.6}, {1, 1, 0}), 0.5);
  // A positive-negative tie counts half.
  EXPECT_DOUBLE_EQ(*auc({0.5, 0.5}, {1, 0}), 0.5);
  EXPECT_FALSE(auc({0.2, 0.8}, {1, 1}).has_value());
  EXPECT_FALSE(auc({0.2, 0.8}, {0, 0}).has_value());
  EXPECT_THROW(auc({0.2}, {0, 1}), std::invalid_argument);
}

TEST(Auc, MatchesBruteForceWithTies) {
  dpvote::StreamRng rng(dpvote::derive_key(19, 0, 0, dpvote::Purpose::kTrial));
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 30);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> truth(n);
    for (int i = 0; i < n; ++i) {
      // Coarse scores force plenty of ties.
      scores[i] = static_cast<double>(static_cast<int>(rng.uniform() * 10)) / 10.0;
      truth[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    const Metric got = auc(scores, truth);
    if (!got) continue;  // single-class draw
    ++checked;
    EXPECT_NEAR(*got, brute_force_auc(scores, truth), 1e-12);
  }
  EXPECT_GE(checked, 40);
}

TEST(Auc, InvariantUnderMonotoneTransforms) {
  const std::vector<double> scores = {0.1, 0.7, 0.3, 0.3, 0.9, 0.2};
  const std::vector<std::uint8_t> truth = {0, 1, 0, 1, 1, 0};
  const double base = *auc(scores, truth);
  std::vector<double> affine(scores.size()), expd(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    affine[i] = 3.0 * scores[i] + 11.0;
    expd[i] = std::exp(scores[i]);
  }
  EXPECT_DOUBLE_EQ(*auc(affine, truth), base);
  EXPECT_DOUBLE_EQ(*auc(expd, truth), base);
}

TEST(AveragePrecision, Fixtures) {
  // Single positive ranked first.
  EXPECT_DOUBLE_EQ(*average_precision({0.9, 0.1, 0.2}, {1, 0, 0}), 1.0);
  // Single positive ranked last of m.
  EXPECT_DOUBLE_EQ(*average_precision({0.9, 0.8, 0.7}, {0, 0, 1}), 1.0 / 3.0);
  // Two positives at ranks 1 and 3: (1/1 + 2/3) / 2.
  EXPECT_DOUBLE_EQ(*average_precision({0.9, 0.8, 0.7}, {1, 0, 1}), 5.0 / 6.0);
  EXPECT_FALSE(average_precision({0.9, 0.1}, {0, 0}).has_value());
  EXPECT_THROW(average_precision({0.2}, {0, 1}), std::invalid_argument);
}

TEST(MacroMean, SkipsUndefinedEntries) {
  EXPECT_DOUBLE_EQ(*macro_mean({Metric(0.5), Metric(), Metric(1.0)}), 0.75);
  EXPECT_FALSE(macro_mean({Metric(), Metric()}).has_value());
  EXPECT_FALSE(macro_mean({}).has_value());
}

TEST(ScoreReleased, DropsWithheldLabelsPerLabel) {
  // Label 0: answered in 2 of 3 queries, both correct. Label 1: answered in
  // all 3, one wrong.
  const std::vector<std::vector<std::int8_t>> released = {
      {1, 0}, {-1, 1}, {0, 1}};
  const std::vector<std::vector<std::uint8_t>> truth = {
      {1, 0}, {0, 1}, {0, 0}};
  const MetricReport report = score_released(released, truth);
  ASSERT_EQ(report.per_label.size(), 2u);
  EXPECT_DOUBLE_EQ(*report.per_label[0].acc, 1.0);
  EXPECT_DOUBLE_EQ(*report.per_label[1].acc, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(report.answered_fraction, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(*report.macro.acc, 0.5 * (1.0 + 2.0 / 3.0));

  // Per-label BAC on label 0: truth classes {1, 0} both present and matched.
  EXPECT_DOUBLE_EQ(*report.per_label[0].bac, 1.0);
}

TEST(ScoreReleased, AllWithheldIsUndefinedNotZero) {
  const std::vector<std::vector<std::int8_t>> released = {{-1}, {-1}};
  const std::vector<std::vector<std::uint8_t>> truth = {{1}, {0}};
  const MetricReport report = score_released(released, truth);
  EXPECT_FALSE(report.per_label[0].acc.has_value());
  EXPECT_FALSE(report.macro.acc.has_value());
  EXPECT_DOUBLE_EQ(report.answered_fraction, 0.0);
}

TEST(ScoreReleased, ValidatesShapes) {
  EXPECT_THROW(score_released({{1, 0}}, {{1, 0}, {0, 0}}),
               std::invalid_argument);
  EXPECT_THROW(score_released({{1, 0}}, {{1}}), std::invalid_argument);

  const MetricReport empty = score_released({}, {});
  EXPECT_TRUE(empty.per_label.empty());
  EXPECT_DOUBLE_EQ(empty.answered_fraction, 0.0);
}

}  // namespace

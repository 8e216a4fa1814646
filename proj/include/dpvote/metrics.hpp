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

#ifndef DPVOTE_METRICS_H_
#define DPVOTE_METRICS_H_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dpvote {

// Undefined metrics (no scored examples, single-class labels, ...) surface
// as nullopt and are excluded from macro averages rather than imputed.
using Metric = std::optional<double>;

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t scored() const { return tp + fp + tn + fn; }
};

inline Metric accuracy(const ConfusionCounts& c) {
  const std::int64_t total = c.scored();
  if (total == 0) return std::nullopt;
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

// Mean of recall and specificity. If only one class appears in the truth,
// the defined half stands alone instead of averaging against 0/NaN.
inline Metric balanced_accuracy(const ConfusionCounts& c) {
  Metric recall, specificity;
  if (c.tp + c.fn > 0) {
    recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (c.tn + c.fp > 0) {
    specificity =
        static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  }
  if (recall && specificity) return 0.5 * (*recall + *specificity);
  if (recall) return recall;
  if (specificity) return specificity;
  return std::nullopt;
}

// Mann-Whitney AUC with midrank tie handling: ties between a positive and a
// negative score count as half a win, so the result matches the exhaustive
// pairwise comparison fraction.
inline Metric auc(const std::vector<double>& scores,
                  const std::vector<std::uint8_t>& truth) {
  if (scores.size() != truth.size()) {
    throw std::invalid_argument("auc: size mismatch");
  }
  const std::size_t n = scores.size();
  std::int64_t positives = 0;
  for (std::uint8_t t : truth) positives += t ? 1 : 0;
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based midrank shared by the tie group [i, j).
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t u = i; u < j; ++u) {
      if (truth[order[u]]) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(negatives));
}

// Average precision as the mean of precision-at-rank over the positive
// ranks, scores sorted descending. Ties keep input order (stable sort) so
// the value is deterministic for two-valued score vectors.
inline Metric average_precision(const std::vector<double>& scores,
                                const std::vector<std::uint8_t>& truth) {
  if (scores.size() != truth.size()) {
    throw std::invalid_argument("average_precision: size mismatch");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::int64_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (truth[order[rank]]) {
      ++hits;
      precision_sum +=
          static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return precision_sum / static_cast<double>(hits);
}

inline Metric macro_mean(const std::vector<Metric>& values) {
  double sum = 0.0;
  std::int64_t defined = 0;
  for (const Metric& v : values) {
    if (v) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

struct LabelMetrics {
  Metric acc;
  Metric bac;
  Metric auc;
  Metric ap;
};

struct MetricReport {
  std::vector<LabelMetrics> per_label;
  LabelMetrics macro;  // macro.ap is the MAP
  double answered_fraction = 0.0;
};

// Scores released bit vectors against ground truth. Withheld labels
// (released < 0) are dropped per label before any metric is computed; the
// released bits double as scores for the ranking metrics.
inline MetricReport score_released(
    const std::vector<std::vector<std::int8_t>>& released,
    const std::vector<std::vector<std::uint8_t>>& truth) {
  if (released.size() != truth.size()) {
    throw std::invalid_argument("score_released: query count mismatch");
  }
  MetricReport report;
  if (released.empty()) return report;
  const std::size_t k = truth.front().size();
  report.per_label.resize(k);

  std::vector<Metric> accs(k), bacs(k), aucs(k), aps(k);
  std::int64_t scored_slots = 0;
  for (std::size_t label = 0; label < k; ++label) {
    ConfusionCounts counts;
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (std::size_t q = 0; q < released.size(); ++q) {
      if (released[q].size() != k || truth[q].size() != k) {
        throw std::invalid_argument("score_released: label count mismatch");
      }
      const std::int8_t r = released[q][label];
      if (r < 0) continue;
      ++scored_slots;
      const bool t = truth[q][label] != 0;
      if (r != 0) {
        (t ? counts.tp : counts.fp) += 1;
      } else {
        (t ? counts.fn : counts.tn) += 1;
      }
      scores.push_back(static_cast<double>(r));
      labels.push_back(t ? 1 : 0);
    }
    LabelMetrics& m = report.per_label[label];
    m.acc = accs[label] = accuracy(counts);
    m.bac = bacs[label] = balanced_accuracy(counts);
    m.auc = aucs[label] = scores.empty() ? Metric() : auc(scores, labels);
    m.ap = aps[label] =
        scores.empty() ? Metric() : average_precision(scores, labels);
  }
  report.macro.acc = macro_mean(accs);
  report.macro.bac = macro_mean(bacs);
  report.macro.auc = macro_mean(aucs);
  report.macro.ap = macro_mean(aps);
  report.answered_fraction =
      static_cast<double>(scored_slots) /
      (static_cast<double>(released.size()) * static_cast<double>(k));
  return report;
}

}  // namespace dpvote

#endif  // DPVOTE_METRICS_H_

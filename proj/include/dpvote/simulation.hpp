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

#ifndef DPVOTE_SIMULATION_H_
#define DPVOTE_SIMULATION_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpvote/accountant.hpp"
#include "dpvote/analysis.hpp"
#include "dpvote/ballots.hpp"
#include "dpvote/math.hpp"
#include "dpvote/mechanisms.hpp"
#include "dpvote/metrics.hpp"
#include "dpvote/rng.hpp"

namespace dpvote {

enum class Correlation { kIndependent, kBlock };

// Synthetic teacher model: per query each teacher's label-i bit is an
// independent Bernoulli(p_i) draw; block(d) mode then copies bit 0 into bits
// 1..d-1 to create perfectly dependent labels.
struct SimulationConfig {
  int teachers = 0;
  int labels = 0;
  std::vector<double> p;  // size 1 = uniform, else one entry per label
  Correlation correlation = Correlation::kIndependent;
  int block_d = 0;
  int queries = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (teachers < 1 || labels < 1 || queries < 0) {
      throw std::invalid_argument("SimulationConfig: bad counts");
    }
    if (p.empty() ||
        (p.size() != 1 && p.size() != static_cast<std::size_t>(labels))) {
      throw std::invalid_argument("SimulationConfig: p must have 1 or k entries");
    }
    for (double v : p) {
      if (!(v >= 0.0) || !(v <= 1.0)) {
        throw std::invalid_argument("SimulationConfig: p outside [0, 1]");
      }
    }
    if (correlation == Correlation::kBlock &&
        (block_d < 1 || block_d > labels)) {
      throw std::invalid_argument("SimulationConfig: block d outside [1, k]");
    }
  }

  double prob(int label) const { return p.size() == 1 ? p[0] : p[label]; }

  // Distribution actually governing a label after the block copy.
  double effective_prob(int label) const {
    if (correlation == Correlation::kBlock && label < block_d) return prob(0);
    return prob(label);
  }
};

struct VoteStream {
  std::vector<BallotMatrix> ballots;
  std::vector<std::vector<std::uint8_t>> truth;
};

// Ground truth is the generating distribution's majority bit: 1 iff the
// label's effective probability exceeds 1/2.
inline VoteStream generate_votes(const SimulationConfig& cfg) {
  cfg.validate();
  VoteStream stream;
  stream.ballots.reserve(cfg.queries);
  stream.truth.reserve(cfg.queries);
  std::vector<std::uint8_t> truth(cfg.labels);
  for (int i = 0; i < cfg.labels; ++i) {
    truth[i] = cfg.effective_prob(i) > 0.5 ? 1 : 0;
  }
  for (int q = 0; q < cfg.queries; ++q) {
    StreamRng rng(derive_key(cfg.seed, static_cast<std::uint64_t>(q), 0,
                             Purpose::kVoteGen));
    BallotMatrix ballots(cfg.teachers, cfg.labels);
    for (int j = 0; j < cfg.teachers; ++j) {
      for (int i = 0; i < cfg.labels; ++i) {
        ballots.set(j, i, rng.bernoulli(cfg.prob(i)) ? 1 : 0);
      }
      if (cfg.correlation == Correlation::kBlock) {
        const std::uint8_t head = ballots.at(j, 0);
        for (int i = 1; i < cfg.block_d; ++i) ballots.set(j, i, head);
      }
    }
    stream.ballots.push_back(std::move(ballots));
    stream.truth.push_back(truth);
  }
  return stream;
}

struct ExperimentResult {
  int answered = 0;                    // queries with >= 1 released label
  std::vector<QueryOutcome> outcomes;  // one per attempted (not refused) query
  DpGuarantee final_guarantee;
  MetricReport metrics;
  bool stopped_early = false;  // budget refused a query before the stream end
  std::vector<double> eps_so_far;  // DP epsilon after each recorded query
};

namespace internal {

inline ExperimentResult finish_experiment(const VoteStream& votes,
                                          std::vector<QueryOutcome> outcomes,
                                          const BudgetLedger& ledger,
                                          bool stopped_early,
                                          std::vector<double> eps_so_far) {
  ExperimentResult result;
  result.outcomes = std::move(outcomes);
  result.stopped_early = stopped_early;
  result.eps_so_far = std::move(eps_so_far);
  result.final_guarantee = ledger.spent();
  std::vector<std::vector<std::int8_t>> released;
  std::vector<std::vector<std::uint8_t>> truth;
  for (std::size_t q = 0; q < result.outcomes.size(); ++q) {
    if (result.outcomes[q].answered) ++result.answered;
    released.push_back(result.outcomes[q].released);
    truth.push_back(votes.truth[q]);
  }
  result.metrics = score_released(released, truth);
  return result;
}

}  // namespace internal

// Sequential budgeted answering: each query is priced before release and the
// run terminates at the first refusal. Oracle-mode (non-private) outcomes
// bypass the ledger entirely.
inline ExperimentResult run_experiment(const VoteStream& votes,
                                       const MechanismConfig& cfg,
                                       const Budget& budget,
                                       const OrderGrid& grid,
                                       std::uint64_t seed) {
  BudgetLedger ledger(grid, budget);
  std::vector<QueryOutcome> outcomes;
  std::vector<double> eps_so_far;
  bool stopped_early = false;
  for (std::size_t q = 0; q < votes.ballots.size(); ++q) {
    QueryOutcome outcome = aggregate(votes.ballots[q], cfg, grid, seed,
                                     static_cast<std::int64_t>(q));
    if (!outcome.non_private) {
      if (ledger.would_exceed(outcome.cost)) {
        stopped_early = true;
        break;
      }
      ledger.charge(outcome.cost);
    }
    outcomes.push_back(std::move(outcome));
    eps_so_far.push_back(ledger.spent().epsilon);
  }
  return internal::finish_experiment(votes, std::move(outcomes), ledger,
                                     stopped_early, std::move(eps_so_far));
}

// Pivot-first answering: release the pivot label alone; a negative pivot
// decides every other label as 0 at no extra charge, a positive pivot pays
// for the remaining labels as usual. A gated (withheld) pivot decides
// nothing, so the rest of the query stays withheld too.
inline ExperimentResult answer_with_dependencies(const VoteStream& votes,
                                                 const MechanismConfig& cfg,
                                                 const Budget& budget,
                                                 const OrderGrid& grid,
                                                 std::uint64_t seed,
                                                 int pivot) {
  if (cfg.kind == MechanismKind::kPowerset) {
    throw std::invalid_argument(
        "answer_with_dependencies: needs a per-label mechanism");
  }
  BudgetLedger ledger(grid, budget);
  std::vector<QueryOutcome> outcomes;
  std::vector<double> eps_so_far;
  bool stopped_early = false;
  for (std::size_t q = 0; q < votes.ballots.size(); ++q) {
    const BallotMatrix& ballots = votes.ballots[q];
    const int k = ballots.labels();
    if (pivot < 0 || pivot >= k) {
      throw std::invalid_argument("answer_with_dependencies: invalid pivot");
    }
    QueryOutcome outcome = aggregate_subset(
        ballots, cfg, grid, seed, static_cast<std::int64_t>(q), {pivot});
    if (!outcome.non_private) {
      if (ledger.would_exceed(outcome.cost)) {
        stopped_early = true;
        break;
      }
      ledger.charge(outcome.cost);
    }
    if (outcome.released[pivot] == 0) {
      for (int i = 0; i < k; ++i) {
        if (i != pivot) outcome.released[i] = 0;
      }
      outcome.answered = true;
    } else if (outcome.released[pivot] == 1) {
      std::vector<int> rest;
      for (int i = 0; i < k; ++i) {
        if (i != pivot) rest.push_back(i);
      }
      QueryOutcome rest_outcome = aggregate_subset(
          ballots, cfg, grid, seed, static_cast<std::int64_t>(q), rest);
      if (!rest_outcome.non_private) {
        if (ledger.would_exceed(rest_outcome.cost)) {
          // The pivot was already paid for and released; keep it, stop here.
          outcomes.push_back(std::move(outcome));
          eps_so_far.push_back(ledger.spent().epsilon);
          stopped_early = true;
          break;
        }
        ledger.charge(rest_outcome.cost);
        outcome.cost = compose({outcome.cost, rest_outcome.cost});
      }
      for (int i : rest) {
        outcome.released[i] = rest_outcome.released[i];
        outcome.gaps[i] = rest_outcome.gaps[i];
        if (!outcome.q_values.empty() && !rest_outcome.q_values.empty()) {
          outcome.q_values[i] = rest_outcome.q_values[i];
        }
        if (!outcome.consensus_pass.empty() &&
            !rest_outcome.consensus_pass.empty()) {
          outcome.consensus_pass[i] = rest_outcome.consensus_pass[i];
        }
      }
      outcome.non_private = outcome.non_private || rest_outcome.non_private;
    }
    outcomes.push_back(std::move(outcome));
    eps_so_far.push_back(ledger.spent().epsilon);
  }
  return internal::finish_experiment(votes, std::move(outcomes), ledger,
                                     stopped_early, std::move(eps_so_far));
}

// Raw (pre-noise) gap samples: per label |V1 - V0| for the per-label
// mechanisms, top-two histogram difference for Powerset.
inline std::vector<double> gap_samples(const std::vector<BallotMatrix>& votes,
                                       MechanismKind kind) {
  std::vector<double> gaps;
  for (const BallotMatrix& ballots : votes) {
    if (kind == MechanismKind::kPowerset) {
      const std::vector<double> sorted =
          powerset_histogram(ballots).sorted_counts_desc();
      gaps.push_back(sorted.size() > 1 ? sorted[0] - sorted[1] : sorted[0]);
    } else {
      const std::vector<int> counts = ballots.positive_counts();
      for (int c : counts) {
        gaps.push_back(std::fabs(2.0 * c - ballots.voters()));
      }
    }
  }
  return gaps;
}

// Empirical CDF over gap samples; values() is sorted ascending.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples)
      : values_(std::move(samples)) {
    if (values_.empty()) throw std::invalid_argument("EmpiricalCdf: empty");
    std::sort(values_.begin(), values_.end());
  }

  const std::vector<double>& values() const { return values_; }

  double at(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) /
           static_cast<double>(values_.size());
  }

  double quantile(double q) const {
    if (!(q >= 0.0) || !(q <= 1.0)) {
      throw std::invalid_argument("EmpiricalCdf: quantile outside [0, 1]");
    }
    const std::size_t idx = std::min(
        values_.size() - 1,
        static_cast<std::size_t>(q * static_cast<double>(values_.size())));
    return values_[idx];
  }

 private:
  std::vector<double> values_;
};

inline EmpiricalCdf gap_cdf(const std::vector<BallotMatrix>& votes,
                            MechanismKind kind) {
  return EmpiricalCdf(gap_samples(votes, kind));
}

enum class DependencyMode { kPositive, kNegative };

// Empirical conditional co-occurrence. Positive mode: entry (i, j) =
// P(label j = 1 | label i = 1); negative mode conditions on absence.
// Conditions that never occur leave the entry undefined rather than 0.
struct DependencyMatrix {
  int k = 0;
  DependencyMode mode = DependencyMode::kPositive;
  std::vector<std::optional<double>> entries;  // row-major k*k

  std::optional<double> at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * k + j];
  }
};

inline DependencyMatrix dependency_matrix(
    const std::vector<std::vector<std::uint8_t>>& labels,
    DependencyMode mode) {
  if (labels.empty()) {
    throw std::invalid_argument("dependency_matrix: no rows");
  }
  const int k = static_cast<int>(labels.front().size());
  DependencyMatrix out;
  out.k = k;
  out.mode = mode;
  out.entries.assign(static_cast<std::size_t>(k) * k, std::nullopt);
  for (int i = 0; i < k; ++i) {
    std::int64_t condition = 0;
    std::vector<std::int64_t> joint(k, 0);
    for (const auto& row : labels) {
      if (static_cast<int>(row.size()) != k) {
        throw std::invalid_argument("dependency_matrix: ragged rows");
      }
      const bool cond = mode == DependencyMode::kPositive ? row[i] != 0
                                                          : row[i] == 0;
      if (!cond) continue;
      ++condition;
      for (int j = 0; j < k; ++j) {
        const bool hit = mode == DependencyMode::kPositive ? row[j] != 0
                                                           : row[j] == 0;
        if (hit) ++joint[j];
      }
    }
    if (condition == 0) continue;
    for (int j = 0; j < k; ++j) {
      out.entries[static_cast<std::size_t>(i) * k + j] =
          static_cast<double>(joint[j]) / static_cast<double>(condition);
    }
  }
  return out;
}

// Analytic expected-cost predictors under the iid Bernoulli(p) teacher
// model. Both use the high-gap closed form, so each is only quoted when the
// low-gap region is negligible; otherwise the predictor reports +inf with
// regime_ok = false.
struct EpsPredictors {
  double binary = std::numeric_limits<double>::infinity();
  double powerset = std::numeric_limits<double>::infinity();
  bool binary_regime_ok = false;
  bool powerset_regime_ok = false;
};

inline EpsPredictors expected_eps_predictors(double p, int t, int k,
                                             double sigma) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("expected_eps_predictors: p outside (0, 1)");
  }
  if (t < 1 || k < 1 || !(sigma > 0.0)) {
    throw std::invalid_argument("expected_eps_predictors: bad t, k or sigma");
  }
  EpsPredictors out;

  // Per-label expected cost: the positive count is Bin(t, p), the raw gap is
  // |2V - t|, and gaps below ceil(sigma) are truncated away. The truncation
  // is only legitimate when its probability mass is negligible.
  const double gap_floor = std::ceil(sigma);
  double truncated_mass = 0.0;
  double expected = 0.0;
  for (int v = 0; v <= t; ++v) {
    const double mass = binomial_pmf(t, p, v);
    const double gap = std::fabs(2.0 * v - t);
    if (gap < gap_floor) {
      truncated_mass += mass;
      continue;
    }
    const ApproxBound ab = approx_bound(gap, sigma);
    if (!ab.regime_ok) {
      truncated_mass += mass;
      continue;
    }
    expected += mass * ab.eps;
  }
  if (truncated_mass <= 0.05) {
    out.binary_regime_ok = true;
    out.binary = k * expected;
  }

  if (k == 1) {
    // A single label makes the two mechanisms identical.
    out.powerset = out.binary;
    out.powerset_regime_ok = out.binary_regime_ok;
    return out;
  }

  // Balls-and-bins surrogate: the modal outcome vector has probability
  // P1 = max(p, 1-p)^k; its expected lead over the runner-up feeds the same
  // high-gap closed form, clamped to the at-most-t physical gap.
  const double p1 = std::pow(std::max(p, 1.0 - p), k);
  const PowersetGapEstimate est = powerset_gap_estimate(t, p1);
  const double gap = std::min(est.q_tilde, static_cast<double>(t));
  if (gap > 0.0) {
    const ApproxBound ab = approx_bound(gap, sigma);
    if (ab.regime_ok) {
      out.powerset_regime_ok = true;
      out.powerset = ab.eps;
    }
  }
  return out;
}

// answered-vs-epsilon sweep on a fixed stream; monotone because a larger
// budget only ever extends the same deterministic run.
struct SweepPoint {
  double epsilon = 0.0;
  int answered = 0;
};

inline std::vector<SweepPoint> epsilon_sweep(const VoteStream& votes,
                                             const MechanismConfig& cfg,
                                             const std::vector<double>& eps,
                                             double delta,
                                             const OrderGrid& grid,
                                             std::uint64_t seed) {
  std::vector<SweepPoint> points;
  points.reserve(eps.size());
  for (double e : eps) {
    const ExperimentResult r =
        run_experiment(votes, cfg, Budget{e, delta}, grid, seed);
    points.push_back(SweepPoint{e, r.answered});
  }
  return points;
}

}  // namespace dpvote

#endif  // DPVOTE_SIMULATION_H_

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

#ifndef DPVOTE_MECHANISMS_H_
#define DPVOTE_MECHANISMS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpvote/accountant.hpp"
#include "dpvote/analysis.hpp"
#include "dpvote/ballots.hpp"
#include "dpvote/rng.hpp"

namespace dpvote {

enum class MechanismKind { kBinary, kTau, kPowerset };

struct MechanismConfig {
  MechanismKind kind = MechanismKind::kBinary;
  double sigma_g = 0.0;      // GNMax noise scale; 0 selects the oracle path
  double sigma_t = 0.0;      // threshold-check noise std
  double threshold_t = 0.0;  // consensus threshold T; 0 disables gating
  double tau = 0.0;          // clip bound, tau voting only
  ClipNorm clip_norm = ClipNorm::kL2;

  bool oracle_mode() const { return sigma_g == 0.0; }
  bool gating_enabled() const { return threshold_t > 0.0; }

  // tau >= sqrt(k) clips nothing: the mechanism degenerates to Binary.
  bool tau_degenerate(int labels) const {
    return kind == MechanismKind::kTau && clip_norm == ClipNorm::kL2 &&
           tau >= std::sqrt(static_cast<double>(labels));
  }

  void validate() const {
    if (sigma_g < 0.0 || sigma_t < 0.0 || threshold_t < 0.0) {
      throw std::invalid_argument("MechanismConfig: negative parameter");
    }
    if (kind == MechanismKind::kTau && !(tau > 0.0)) {
      throw std::invalid_argument("MechanismConfig: tau voting needs tau > 0");
    }
    if (gating_enabled() && !oracle_mode() && !(sigma_t > 0.0)) {
      throw std::invalid_argument(
          "MechanismConfig: noiseless gating requires the oracle mode");
    }
  }
};

// Result of one query. released[i] is 0/1, or -1 when the label was withheld
// (failed gate, or outside the processed subset). cost is the total RDP
// charge for the query; in oracle mode it is +inf per order and the outcome
// is flagged non_private so callers cannot account for it by accident.
struct QueryOutcome {
  explicit QueryOutcome(const OrderGrid& grid)
      : cost(RdpCurve::zero(grid)) {}

  bool answered = false;
  std::vector<std::int8_t> released;
  RdpCurve cost;
  bool non_private = false;
  std::vector<double> gaps;
  std::vector<double> q_values;
  std::vector<std::uint8_t> consensus_pass;
};

namespace internal {

// Shared per-label two-bin flow for Binary and tau voting. v1/v0 hold the
// (possibly clipped) per-label counts; per_label_delta2 prices a single
// label's stacked release and flat_delta2, when present, prices the whole
// vector at once (tau voting); the cheaper of the two applies per order.
struct TwoBinInput {
  std::vector<double> v1;
  std::vector<double> v0;
  double per_label_delta2 = 0.0;
  std::optional<double> flat_delta2;
};

inline QueryOutcome two_bin_aggregate(const TwoBinInput& input,
                                      const MechanismConfig& cfg,
                                      const OrderGrid& grid,
                                      std::uint64_t seed,
                                      std::int64_t query_id,
                                      const std::vector<int>& labels) {
  const int k = static_cast<int>(input.v1.size());
  QueryOutcome outcome(grid);
  outcome.released.assign(k, -1);
  outcome.gaps.assign(k, 0.0);
  if (!cfg.oracle_mode()) outcome.q_values.assign(k, 0.0);
  if (cfg.gating_enabled()) outcome.consensus_pass.assign(k, 0);

  const double bin_sigma = cfg.sigma_g / std::sqrt(2.0);
  const double label_coef = input.per_label_delta2 * input.per_label_delta2 /
                            (2.0 * cfg.sigma_g * cfg.sigma_g);

  std::vector<RdpCurve> label_costs;
  int checks = 0;
  for (int i : labels) {
    const double v1 = input.v1[i];
    const double v0 = input.v0[i];
    outcome.gaps[i] = std::fabs(v1 - v0);

    if (cfg.gating_enabled()) {
      ++checks;
      double check = std::max(v0, v1);
      if (!cfg.oracle_mode()) {
        StreamRng rng(derive_key(seed, static_cast<std::uint64_t>(query_id),
                                 static_cast<std::uint64_t>(i),
                                 Purpose::kThreshold));
        check += rng.gaussian(cfg.sigma_t);
      }
      if (!(check > cfg.threshold_t)) continue;
      outcome.consensus_pass[i] = 1;
    }

    if (cfg.oracle_mode()) {
      outcome.released[i] = v1 > v0 ? 1 : 0;
      continue;
    }

    StreamRng rng(derive_key(seed, static_cast<std::uint64_t>(query_id),
                             static_cast<std::uint64_t>(i), Purpose::kRelease));
    const double n0 = v0 + rng.gaussian(bin_sigma);
    const double n1 = v1 + rng.gaussian(bin_sigma);
    outcome.released[i] = n1 > n0 ? 1 : 0;  // exact tie releases 0

    const GapReport report =
        gap_bound_q({std::max(v0, v1), std::min(v0, v1)}, bin_sigma);
    outcome.q_values[i] = report.q;
    label_costs.push_back(released_cost_curve(report.q, label_coef, grid));
  }

  outcome.answered = std::any_of(outcome.released.begin(),
                                 outcome.released.end(),
                                 [](std::int8_t r) { return r >= 0; });

  if (cfg.oracle_mode()) {
    outcome.non_private = true;
    outcome.cost = RdpCurve::infinite(grid);
    return outcome;
  }

  RdpCurve released_cost = compose(label_costs, grid);
  if (input.flat_delta2 && !label_costs.empty()) {
    const RdpCurve flat = gaussian_rdp(*input.flat_delta2, cfg.sigma_g, grid);
    for (std::size_t j = 0; j < released_cost.eps.size(); ++j) {
      released_cost.eps[j] = std::min(released_cost.eps[j], flat.eps[j]);
    }
  }
  std::vector<RdpCurve> parts{released_cost};
  if (checks > 0) {
    // Each consensus check is one Gaussian release of the max count
    // (sensitivity 1) at std sigma_t, charged whether or not it passes.
    RdpCurve check_cost = gaussian_rdp(1.0, cfg.sigma_t, grid);
    for (double& e : check_cost.eps) e *= checks;
    parts.push_back(std::move(check_cost));
  }
  outcome.cost = compose(parts);
  return outcome;
}

inline std::vector<int> all_labels(int k) {
  std::vector<int> labels(k);
  std::iota(labels.begin(), labels.end(), 0);
  return labels;
}

}  // namespace internal

// Binary voting: independent two-bin noisy argmax per label, with optional
// per-label consensus gating. Noise is N(0, sigma_g^2/2) per bin so the bin
// difference carries variance sigma_g^2.
inline QueryOutcome binary_aggregate_subset(const BallotMatrix& ballots,
                                            const MechanismConfig& cfg,
                                            const OrderGrid& grid,
                                            std::uint64_t seed,
                                            std::int64_t query_id,
                                            const std::vector<int>& labels) {
  cfg.validate();
  internal::TwoBinInput input;
  const std::vector<int> counts = ballots.positive_counts();
  input.v1.assign(counts.begin(), counts.end());
  input.v0.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    input.v0[i] = ballots.voters() - input.v1[i];
  }
  input.per_label_delta2 = std::sqrt(2.0);
  return internal::two_bin_aggregate(input, cfg, grid, seed, query_id, labels);
}

inline QueryOutcome binary_aggregate(const BallotMatrix& ballots,
                                     const MechanismConfig& cfg,
                                     const OrderGrid& grid, std::uint64_t seed,
                                     std::int64_t query_id) {
  return binary_aggregate_subset(ballots, cfg, grid, seed, query_id,
                                 internal::all_labels(ballots.labels()));
}

// tau voting: ballots are norm-clipped before counting. The flat
// data-independent price covers the whole released vector: delta2 =
// sqrt(2) * min(tau, sqrt(k)) under l2 clipping, and 2 * min(tau, k) under
// l1 clipping (via delta2 <= delta1), which is the comparison baseline.
inline QueryOutcome tau_aggregate_subset(const BallotMatrix& ballots,
                                         const MechanismConfig& cfg,
                                         const OrderGrid& grid,
                                         std::uint64_t seed,
                                         std::int64_t query_id,
                                         const std::vector<int>& labels) {
  cfg.validate();
  const ClippedBallots clipped = clip(ballots, cfg.tau, cfg.clip_norm);
  internal::TwoBinInput input;
  input.v1 = clipped.positive_counts();
  input.v0.resize(input.v1.size());
  for (std::size_t i = 0; i < input.v1.size(); ++i) {
    input.v0[i] = ballots.voters() - input.v1[i];
  }
  const double k = static_cast<double>(ballots.labels());
  input.per_label_delta2 = std::sqrt(2.0) * std::min(1.0, cfg.tau);
  if (cfg.clip_norm == ClipNorm::kL2) {
    input.flat_delta2 = std::sqrt(2.0) * std::min(cfg.tau, std::sqrt(k));
  } else {
    input.flat_delta2 = 2.0 * std::min(cfg.tau, k);
  }
  return internal::two_bin_aggregate(input, cfg, grid, seed, query_id, labels);
}

inline QueryOutcome tau_aggregate(const BallotMatrix& ballots,
                                  const MechanismConfig& cfg,
                                  const OrderGrid& grid, std::uint64_t seed,
                                  std::int64_t query_id) {
  return tau_aggregate_subset(ballots, cfg, grid, seed, query_id,
                              internal::all_labels(ballots.labels()));
}

// Powerset voting: one noisy argmax over the sparse histogram of cast
// outcome vectors. A single vote change moves two bins by one each, so the
// release is priced as one GNMax with delta2 = sqrt(2) regardless of k.
inline QueryOutcome powerset_aggregate(const BallotMatrix& ballots,
                                       const MechanismConfig& cfg,
                                       const OrderGrid& grid,
                                       std::uint64_t seed,
                                       std::int64_t query_id) {
  cfg.validate();
  const int k = ballots.labels();
  QueryOutcome outcome(grid);
  outcome.released.assign(k, -1);

  const PowersetHistogram hist = powerset_histogram(ballots);
  const std::vector<double> sorted = hist.sorted_counts_desc();
  outcome.gaps.assign(
      1, sorted.size() > 1 ? sorted[0] - sorted[1] : sorted[0]);

  std::vector<RdpCurve> parts;
  if (cfg.gating_enabled()) {
    outcome.consensus_pass.assign(1, 0);
    double check = sorted[0];
    if (!cfg.oracle_mode()) {
      StreamRng rng(derive_key(seed, static_cast<std::uint64_t>(query_id), 0,
                               Purpose::kThreshold));
      check += rng.gaussian(cfg.sigma_t);
      parts.push_back(gaussian_rdp(1.0, cfg.sigma_t, grid));
    }
    if (!(check > cfg.threshold_t)) {
      outcome.cost = compose(parts, grid);
      if (cfg.oracle_mode()) {
        outcome.non_private = true;
        outcome.cost = RdpCurve::infinite(grid);
      }
      return outcome;
    }
    outcome.consensus_pass[0] = 1;
  }

  // Map order is lexicographic in the outcome bits, so ties in the noiseless
  // path resolve to the smallest outcome deterministically.
  const std::vector<std::uint8_t>* winner = nullptr;
  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t bin_index = 0;
  for (const auto& [bits, count] : hist.counts) {
    double value = static_cast<double>(count);
    if (!cfg.oracle_mode()) {
      StreamRng rng(derive_key(seed, static_cast<std::uint64_t>(query_id),
                               bin_index, Purpose::kPowersetBin));
      value += rng.gaussian(cfg.sigma_g);
    }
    if (value > best) {
      best = value;
      winner = &bits;
    }
    ++bin_index;
  }
  for (int i = 0; i < k; ++i) outcome.released[i] = (*winner)[i];
  outcome.answered = true;

  if (cfg.oracle_mode()) {
    outcome.non_private = true;
    outcome.cost = RdpCurve::infinite(grid);
    return outcome;
  }

  const GapReport report = gap_bound_q(sorted, cfg.sigma_g);
  outcome.q_values.assign(1, report.q);
  const double coef = 1.0 / (cfg.sigma_g * cfg.sigma_g);
  parts.push_back(released_cost_curve(report.q, coef, grid));
  outcome.cost = compose(parts, grid);
  return outcome;
}

inline QueryOutcome aggregate(const BallotMatrix& ballots,
                              const MechanismConfig& cfg,
                              const OrderGrid& grid, std::uint64_t seed,
                              std::int64_t query_id) {
  switch (cfg.kind) {
    case MechanismKind::kBinary:
      return binary_aggregate(ballots, cfg, grid, seed, query_id);
    case MechanismKind::kTau:
      return tau_aggregate(ballots, cfg, grid, seed, query_id);
    case MechanismKind::kPowerset:
      return powerset_aggregate(ballots, cfg, grid, seed, query_id);
  }
  throw std::invalid_argument("aggregate: unknown mechanism");
}

// Processes only the given labels; untouched labels stay -1 at zero cost.
// Per-label RNG streams are keyed by the original label index, so splitting
// a query into subsets reproduces the full run's bits label for label.
inline QueryOutcome aggregate_subset(const BallotMatrix& ballots,
                                     const MechanismConfig& cfg,
                                     const OrderGrid& grid, std::uint64_t seed,
                                     std::int64_t query_id,
                                     const std::vector<int>& labels) {
  switch (cfg.kind) {
    case MechanismKind::kBinary:
      return binary_aggregate_subset(ballots, cfg, grid, seed, query_id,
                                     labels);
    case MechanismKind::kTau:
      return tau_aggregate_subset(ballots, cfg, grid, seed, query_id, labels);
    case MechanismKind::kPowerset:
      throw std::invalid_argument(
          "aggregate_subset: Powerset releases whole vectors only");
  }
  throw std::invalid_argument("aggregate_subset: unknown mechanism");
}

}  // namespace dpvote

#endif  // DPVOTE_MECHANISMS_H_

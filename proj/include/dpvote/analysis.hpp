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

#ifndef DPVOTE_ANALYSIS_H_
#define DPVOTE_ANALYSIS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dpvote/accountant.hpp"
#include "dpvote/ballots.hpp"
#include "dpvote/math.hpp"

namespace dpvote {

// ---------------------------------------------------------------------------
// Gap bound: probability that Gaussian noise of std sigma per bin flips the
// argmax away from the top bin. Union bound over pairwise flips:
//   q(n) = min(1, 1/2 * sum_{i != i*} erfc((n_1 - n_i) / (2 sigma))).
// ---------------------------------------------------------------------------

struct GapReport {
  std::vector<double> sorted_counts;  // descending
  double simple_gap = 0.0;            // n_1 - n_2 (n_1 for a single bin)
  double q = 0.0;                     // clamped into [0, 1]
};

inline GapReport gap_bound_q(std::vector<double> counts, double sigma) {
  if (counts.empty()) throw std::invalid_argument("gap_bound_q: no bins");
  if (!(sigma > 0.0)) throw std::invalid_argument("gap_bound_q: sigma <= 0");
  for (double c : counts) {
    if (std::isnan(c) || c < 0.0) {
      throw std::invalid_argument("gap_bound_q: negative count");
    }
  }
  std::sort(counts.begin(), counts.end(), std::greater<double>());
  GapReport report;
  report.simple_gap =
      counts.size() > 1 ? counts[0] - counts[1] : counts[0];
  double sum = 0.0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    sum += 0.5 * erfc((counts[0] - counts[i]) / (2.0 * sigma));
  }
  report.q = std::min(1.0, sum);
  report.sorted_counts = std::move(counts);
  return report;
}

// ---------------------------------------------------------------------------
// Data-dependent RDP bound for a mechanism with a likely outcome.
// With q >= Pr[outcome differs], orders mu1 > lambda and mu2 > 1, and RDP
// guarantees (mu1, eps1), (mu2, eps2):
//   bound = log((1-q) A^{lambda-1} + q B^{lambda-1}) / (lambda - 1)
//   A = (1-q) / (1 - (q e^{eps2})^{(mu2-1)/mu2}),  B = e^{eps1} / q^{1/(mu1-1)}
// valid while q <= e^{(mu2-1) eps2} / (mu1/(mu1-1) * mu2/(mu2-1))^{mu2}
// and q e^{eps2} < 1 (A's denominator must stay positive).
// ---------------------------------------------------------------------------

struct DataDependentParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

enum class TheoremFailure {
  kNone,
  kInvalidParams,
  kOrderAboveMu1,
  kQAboveBound,
};

struct TheoremBoundResult {
  std::optional<double> eps;
  TheoremFailure failure = TheoremFailure::kNone;

  bool ok() const { return failure == TheoremFailure::kNone; }
};

inline TheoremBoundResult theorem_bound(double q,
                                        const DataDependentParams& params,
                                        double lambda) {
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;
  const double eps1 = params.eps1;
  const double eps2 = params.eps2;
  if (!(q >= 0.0) || !(q <= 1.0)) {
    throw std::invalid_argument("theorem_bound: q outside [0, 1]");
  }
  if (!(lambda > 1.0)) {
    throw std::invalid_argument("theorem_bound: lambda must be > 1");
  }
  if (!(mu1 > 1.0) || !(mu2 > 1.0) || eps1 < 0.0 || eps2 < 0.0) {
    return {std::nullopt, TheoremFailure::kInvalidParams};
  }
  if (lambda > mu1) {
    return {std::nullopt, TheoremFailure::kOrderAboveMu1};
  }
  const double logq = std::log(q);  // -inf for q == 0 is fine below
  const double log_bound = (mu2 - 1.0) * eps2 -
                           mu2 * (std::log(mu1 / (mu1 - 1.0)) +
                                  std::log(mu2 / (mu2 - 1.0)));
  if (logq > log_bound || logq + eps2 >= 0.0) {
    return {std::nullopt, TheoremFailure::kQAboveBound};
  }

  // log A; (q e^{eps2})^{(mu2-1)/mu2} < 1 is guaranteed by the guard above.
  const double inner = std::exp((mu2 - 1.0) / mu2 * (logq + eps2));
  const double log_a = std::log1p(-q) - std::log1p(-inner);
  // q B^{lambda-1} = q^{1 - (lambda-1)/(mu1-1)} e^{(lambda-1) eps1}, kept in
  // log space so q -> 0 degrades gracefully instead of producing 0 * inf.
  const double term1 = std::log1p(-q) + (lambda - 1.0) * log_a;
  const double term2 =
      logq * (1.0 - (lambda - 1.0) / (mu1 - 1.0)) + (lambda - 1.0) * eps1;
  const double bound = log_add_exp(term1, term2) / (lambda - 1.0);
  return {std::max(bound, 0.0), TheoremFailure::kNone};
}

// ---------------------------------------------------------------------------
// Order selection. For a release with data-independent curve eps(l) = c * l
// the effective GNMax scale is sigma_eff = 1/sqrt(c); candidates follow
// sigma_eff * sqrt(log(1/q)) * {1/2, 1, 2} with mu1 = mu2 + 1 and
// eps_i = c * mu_i. The cheapest valid candidate wins.
// ---------------------------------------------------------------------------

struct DataDependentCost {
  bool valid = false;
  double eps = std::numeric_limits<double>::infinity();
  DataDependentParams params;
};

inline DataDependentCost data_dependent_rdp(double q, double gauss_coef,
                                            double lambda) {
  if (!(gauss_coef > 0.0)) {
    throw std::invalid_argument("data_dependent_rdp: coef <= 0");
  }
  DataDependentCost best;
  if (q >= 1.0) return best;
  if (q <= 0.0) {
    // Deterministic outcome on this data: the bound collapses to zero.
    best.valid = true;
    best.eps = 0.0;
    return best;
  }
  const double sigma_eff = 1.0 / std::sqrt(gauss_coef);
  const double base = sigma_eff * std::sqrt(std::log(1.0 / q));
  for (double scale : {0.5, 1.0, 2.0}) {
    const double mu2 = base * scale;
    if (!(mu2 > 1.0)) continue;
    DataDependentParams params;
    params.mu2 = mu2;
    params.mu1 = mu2 + 1.0;
    params.eps1 = gauss_coef * params.mu1;
    params.eps2 = gauss_coef * params.mu2;
    const TheoremBoundResult r = theorem_bound(q, params, lambda);
    if (r.ok() && *r.eps < best.eps) {
      best.valid = true;
      best.eps = *r.eps;
      best.params = params;
    }
  }
  return best;
}

// Per-order released cost: the data-dependent bound where valid and cheaper,
// the data-independent Gaussian cost c * lambda otherwise.
inline RdpCurve released_cost_curve(double q, double gauss_coef,
                                    const OrderGrid& grid) {
  std::vector<double> eps;
  eps.reserve(grid.size());
  for (double lambda : grid.orders()) {
    const double di = gauss_coef * lambda;
    const DataDependentCost dd = data_dependent_rdp(q, gauss_coef, lambda);
    eps.push_back(dd.valid ? std::min(di, dd.eps) : di);
  }
  return RdpCurve(grid, std::move(eps));
}

// ---------------------------------------------------------------------------
// Closed-form approximation: lambda = gap/4, eps = exp(-2 lambda/sigma^2) /
// lambda. Only meaningful when the resulting order exceeds 1; callers treat
// regime_ok == false as "fall back to something sound".
// ---------------------------------------------------------------------------

struct ApproxBound {
  double lambda = 0.0;
  double eps = 0.0;
  bool regime_ok = false;
};

inline ApproxBound approx_bound(double gap, double sigma) {
  if (!(gap > 0.0)) throw std::invalid_argument("approx_bound: gap <= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("approx_bound: sigma <= 0");
  ApproxBound out;
  out.lambda = gap / 4.0;
  out.eps = std::exp(-2.0 * out.lambda / (sigma * sigma)) / out.lambda;
  out.regime_ok = out.lambda > 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Balls-and-bins estimate of the Powerset gap. With t voters and modal
// outcome probability p1, the expected top-bin load solves
// c ln(t p1) + c = c ln c, i.e. c = e t p1; the runner-up is modelled as a
// single vote, so the gap estimate is max(0, c - 1).
// ---------------------------------------------------------------------------

struct PowersetGapEstimate {
  double c = 0.0;
  double q_tilde = 0.0;
};

inline PowersetGapEstimate powerset_gap_estimate(int t, double p1) {
  if (t < 1) throw std::invalid_argument("powerset_gap_estimate: t < 1");
  if (!(p1 >= 0.0) || !(p1 <= 1.0)) {
    throw std::invalid_argument("powerset_gap_estimate: p1 outside [0, 1]");
  }
  PowersetGapEstimate out;
  out.c = std::exp(1.0) * t * p1;
  out.q_tilde = std::max(0.0, out.c - 1.0);
  return out;
}

// Stirling-based upper bound C(n, k) <= (e n / k)^k.
inline double stirling_binom_upper(int n, int k) {
  if (k < 1 || k > n) {
    throw std::invalid_argument("stirling_binom_upper: need 1 <= k <= n");
  }
  return std::pow(std::exp(1.0) * n / k, k);
}

// ---------------------------------------------------------------------------
// Exhaustive sensitivity oracle. Enumerates every ballot matrix in the
// (n, k) domain and every single-row replacement, reporting the maximum
// lp-deviation of f together with a witness pair. Intended for validating
// hand-derived sensitivities on small domains, not for production sizing.
// ---------------------------------------------------------------------------

struct SensitivityReport {
  double norm_order = 2.0;
  double delta = 0.0;
  BallotMatrix witness_a;
  BallotMatrix witness_b;
};

using BallotFunction =
    std::function<std::vector<double>(const BallotMatrix&)>;

inline double lp_norm(const std::vector<double>& a,
                      const std::vector<double>& b, double p) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("lp_norm: dimension mismatch");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p < 1");
  double acc = 0.0;
  if (p == 1.0) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
  }
  if (p == 2.0) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::pow(std::fabs(a[i] - b[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

inline SensitivityReport sensitivity_oracle(const BallotFunction& f, int n,
                                            int k, double p) {
  if (n < 1 || k < 1) {
    throw std::invalid_argument("sensitivity_oracle: need n, k >= 1");
  }
  const int bits = n * k;
  if (bits > 24) {
    throw std::invalid_argument(
        "sensitivity_oracle: domain too large for exhaustive search");
  }
  const std::uint32_t num_states = 1u << bits;
  const std::uint32_t row_space = 1u << k;

  auto decode = [&](std::uint32_t state) {
    BallotMatrix m(n, k);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < k; ++i) {
        m.set(j, i, (state >> (j * k + i)) & 1u);
      }
    }
    return m;
  };

  std::vector<std::vector<double>> cache(num_states);
  for (std::uint32_t s = 0; s < num_states; ++s) cache[s] = f(decode(s));

  SensitivityReport report{p, -1.0, decode(0), decode(0)};
  const std::uint32_t row_mask = row_space - 1;
  for (std::uint32_t s = 0; s < num_states; ++s) {
    for (int j = 0; j < n; ++j) {
      const int shift = j * k;
      const std::uint32_t current_row = (s >> shift) & row_mask;
      for (std::uint32_t replacement = current_row + 1;
           replacement < row_space; ++replacement) {
        const std::uint32_t neighbor =
            (s & ~(row_mask << shift)) | (replacement << shift);
        const double d = lp_norm(cache[s], cache[neighbor], p);
        if (d > report.delta) {
          report.delta = d;
          report.witness_a = decode(s);
          report.witness_b = decode(neighbor);
        }
      }
    }
  }
  return report;
}

}  // namespace dpvote

#endif  // DPVOTE_ANALYSIS_H_

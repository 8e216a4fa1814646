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

#ifndef DPVOTE_ACCOUNTANT_H_
#define DPVOTE_ACCOUNTANT_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpvote/math.hpp"

namespace dpvote {

// Grid of Renyi orders. Orders are strictly > 1, sorted and deduplicated;
// curves and ledgers are only comparable on identical grids.
class OrderGrid {
 public:
  explicit OrderGrid(std::vector<double> orders) : orders_(std::move(orders)) {
    if (orders_.empty()) throw std::invalid_argument("OrderGrid: empty");
    std::sort(orders_.begin(), orders_.end());
    orders_.erase(std::unique(orders_.begin(), orders_.end()), orders_.end());
    if (orders_.front() <= 1.0) {
      throw std::invalid_argument("OrderGrid: orders must be > 1");
    }
  }

  // Integer orders 2..64 plus 1.25 and 1.5 near the low end.
  static OrderGrid defaults() {
    std::vector<double> orders = {1.25, 1.5};
    for (int i = 2; i <= 64; ++i) orders.push_back(static_cast<double>(i));
    return OrderGrid(std::move(orders));
  }

  const std::vector<double>& orders() const { return orders_; }
  std::size_t size() const { return orders_.size(); }
  bool operator==(const OrderGrid& other) const {
    return orders_ == other.orders_;
  }

 private:
  std::vector<double> orders_;
};

// epsilon(lambda) sampled on a grid. Entries may be +inf (uncharged or
// oracle-mode costs); they simply never win the conversion minimum.
struct RdpCurve {
  OrderGrid grid;
  std::vector<double> eps;

  RdpCurve(OrderGrid g, std::vector<double> e)
      : grid(std::move(g)), eps(std::move(e)) {
    if (eps.size() != grid.size()) {
      throw std::invalid_argument("RdpCurve: eps/grid size mismatch");
    }
    for (double v : eps) {
      if (std::isnan(v) || v < 0.0) {
        throw std::invalid_argument("RdpCurve: eps entries must be >= 0");
      }
    }
  }

  static RdpCurve zero(const OrderGrid& g) {
    return RdpCurve(g, std::vector<double>(g.size(), 0.0));
  }

  static RdpCurve infinite(const OrderGrid& g) {
    return RdpCurve(g, std::vector<double>(
                           g.size(), std::numeric_limits<double>::infinity()));
  }
};

struct DpGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  double order = 0.0;  // grid order achieving the minimum
};

struct Budget {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Gaussian mechanism: eps(lambda) = lambda * delta2^2 / (2 sigma^2). The
// same curve covers scalar and vector releases; only the l2 sensitivity of
// the released vector enters.
inline RdpCurve gaussian_rdp(double delta2, double sigma,
                             const OrderGrid& grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_rdp: sigma <= 0");
  if (delta2 < 0.0) throw std::invalid_argument("gaussian_rdp: delta2 < 0");
  const double coef = delta2 * delta2 / (2.0 * sigma * sigma);
  std::vector<double> eps;
  eps.reserve(grid.size());
  for (double lambda : grid.orders()) eps.push_back(coef * lambda);
  return RdpCurve(grid, std::move(eps));
}

// Adaptive sequential composition: pointwise sum over the grid, accumulated
// pairwise to bound floating-point drift. The empty composition is the
// zero curve.
inline RdpCurve compose(const std::vector<RdpCurve>& parts,
                        const OrderGrid& grid) {
  for (const RdpCurve& c : parts) {
    if (!(c.grid == grid)) throw std::invalid_argument("compose: grid mismatch");
  }
  std::vector<double> eps(grid.size(), 0.0);
  std::vector<double> column(parts.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < parts.size(); ++j) column[j] = parts[j].eps[i];
    eps[i] = pairwise_sum(column);
  }
  return RdpCurve(grid, std::move(eps));
}

inline RdpCurve compose(const std::vector<RdpCurve>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("compose: no curves and no grid");
  }
  return compose(parts, parts.front().grid);
}

// Conversion to (epsilon, delta)-DP: min over grid orders of
// eps(lambda) + log(1/delta) / (lambda - 1); ties go to the smallest order.
inline DpGuarantee to_dp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("to_dp: delta outside (0, 1)");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  double best = std::numeric_limits<double>::infinity();
  double best_order = curve.grid.orders().front();
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const double lambda = curve.grid.orders()[i];
    const double value = curve.eps[i] + log_inv_delta / (lambda - 1.0);
    if (value < best) {
      best = value;
      best_order = lambda;
    }
  }
  return DpGuarantee{best, delta, best_order};
}

// Streaming RDP ledger with pre-commit semantics: callers must consult
// would_exceed() before releasing a query; a query that would exceed the
// budget is neither answered nor charged.
class BudgetLedger {
 public:
  BudgetLedger(OrderGrid grid, Budget budget)
      : grid_(std::move(grid)), budget_(budget), accumulated_(grid_.size()) {
    if (!(budget_.delta > 0.0) || !(budget_.delta < 1.0)) {
      throw std::invalid_argument("BudgetLedger: delta outside (0, 1)");
    }
    if (budget_.epsilon < 0.0) {
      throw std::invalid_argument("BudgetLedger: negative epsilon budget");
    }
  }

  const OrderGrid& grid() const { return grid_; }
  const Budget& budget() const { return budget_; }

  RdpCurve accumulated() const {
    std::vector<double> eps(grid_.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      eps[i] = accumulated_[i].value();
    }
    return RdpCurve(grid_, std::move(eps));
  }

  DpGuarantee spent() const { return to_dp(accumulated(), budget_.delta); }

  bool would_exceed(const RdpCurve& cost) const {
    check_grid(cost);
    std::vector<double> eps(grid_.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      eps[i] = accumulated_[i].value() + cost.eps[i];
    }
    return to_dp(RdpCurve(grid_, std::move(eps)), budget_.delta).epsilon >
           budget_.epsilon;
  }

  void charge(const RdpCurve& cost) {
    check_grid(cost);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      accumulated_[i].add(cost.eps[i]);
    }
  }

  bool exhausted() const { return spent().epsilon > budget_.epsilon; }

  // Restores a ledger from persisted per-order totals.
  static BudgetLedger restore(OrderGrid grid, Budget budget,
                              const std::vector<double>& eps) {
    BudgetLedger ledger(std::move(grid), budget);
    if (eps.size() != ledger.grid_.size()) {
      throw std::invalid_argument("BudgetLedger: persisted eps size mismatch");
    }
    ledger.charge(RdpCurve(ledger.grid_, eps));
    return ledger;
  }

 private:
  void check_grid(const RdpCurve& cost) const {
    if (!(cost.grid == grid_)) {
      throw std::invalid_argument("BudgetLedger: cost grid mismatch");
    }
  }

  OrderGrid grid_;
  Budget budget_;
  std::vector<KahanAccumulator> accumulated_;
};

}  // namespace dpvote

#endif  // DPVOTE_ACCOUNTANT_H_

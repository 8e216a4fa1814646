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

#include "dpvote/accountant.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

namespace {

using dpvote::Budget;
using dpvote::BudgetLedger;
using dpvote::compose;
using dpvote::DpGuarantee;
using dpvote::gaussian_rdp;
using dpvote::OrderGrid;
using dpvote::RdpCurve;
using dpvote::to_dp;

TEST(OrderGrid, SortsDedupsAndValidates) {
  const OrderGrid grid({3.0, 2.0, 2.0, 8.0});
  EXPECT_EQ(grid.orders(), (std::vector<double>{2.0, 3.0, 8.0}));
  EXPECT_THROW(OrderGrid(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(OrderGrid({1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(OrderGrid({0.5}), std::invalid_argument);

  const OrderGrid defaults = OrderGrid::defaults();
  EXPECT_EQ(defaults.size(), 65u);
  EXPECT_DOUBLE_EQ(defaults.orders().front(), 1.25);
  EXPECT_DOUBLE_EQ(defaults.orders()[1], 1.5);
  EXPECT_DOUBLE_EQ(defaults.orders().back(), 64.0);
}

TEST(RdpCurve, ValidatesEntries) {
  const OrderGrid grid({2.0, 3.0});
  const std::vector<double> short_eps = {0.1};
  const std::vector<double> negative_eps = {0.1, -0.2};
  EXPECT_THROW(RdpCurve(grid, short_eps), std::invalid_argument);
  EXPECT_THROW(RdpCurve(grid, negative_eps), std::invalid_argument);
  const RdpCurve inf = RdpCurve::infinite(grid);
  EXPECT_TRUE(std::isinf(inf.eps[0]));
  EXPECT_DOUBLE_EQ(RdpCurve::zero(grid).eps[1], 0.0);
}

TEST(GaussianRdp, TauVotingExample) {
  // tau = 1.8, sigma = 9: eps(20) = 20 * 1.8^2 / 81 = 0.8.
  const OrderGrid grid = OrderGrid::defaults();
  const RdpCurve curve = gaussian_rdp(std::sqrt(2.0) * 1.8, 9.0, grid);
  std::size_t at20 = 0;
  while (grid.orders()[at20] != 20.0) ++at20;
  EXPECT_NEAR(curve.eps[at20], 0.8, 1e-12);
}

TEST(GaussianRdp, ScaleInvarianceAndLinearity) {
  const OrderGrid grid = OrderGrid::defaults();
  const RdpCurve a = gaussian_rdp(1.7, 5.0, grid);
  const RdpCurve b = gaussian_rdp(3.4, 10.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(a.eps[i], b.eps[i], 1e-15);
    EXPECT_NEAR(a.eps[i], grid.orders()[i] * 1.7 * 1.7 / 50.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(gaussian_rdp(0.0, 3.0, grid).eps[10], 0.0);
  EXPECT_THROW(gaussian_rdp(1.0, 0.0, grid), std::invalid_argument);
  EXPECT_THROW(gaussian_rdp(-1.0, 1.0, grid), std::invalid_argument);
}

TEST(Compose, SumsPointwise) {
  const OrderGrid grid({2.0, 4.0});
  const RdpCurve a(grid, {0.1, 0.2});
  const RdpCurve b(grid, {0.3, 0.5});
  const RdpCurve sum = compose({a, b});
  EXPECT_DOUBLE_EQ(sum.eps[0], 0.4);
  EXPECT_DOUBLE_EQ(sum.eps[1], 0.7);

  // Identity and empty composition.
  const RdpCurve with_zero = compose({a, RdpCurve::zero(grid)});
  EXPECT_EQ(with_zero.eps, a.eps);
  EXPECT_EQ(compose({}, grid).eps, RdpCurve::zero(grid).eps);
  EXPECT_THROW(compose({}), std::invalid_argument);
  EXPECT_THROW(compose({a}, OrderGrid({2.0, 5.0})), std::invalid_argument);
}

TEST(ToDp, ZeroCurveGivesConversionFloor) {
  const RdpCurve zero = RdpCurve::zero(OrderGrid::defaults());
  const DpGuarantee g = to_dp(zero, 1e-6);
  EXPECT_NEAR(g.epsilon, 0.2192938183803853032398087, 1e-15);
  EXPECT_DOUBLE_EQ(g.order, 64.0);  // log(1/delta)/(lambda-1) decreasing
  EXPECT_DOUBLE_EQ(g.delta, 1e-6);
  EXPECT_THROW(to_dp(zero, 0.0), std::invalid_argument);
  EXPECT_THROW(to_dp(zero, 1.0), std::invalid_argument);
}

TEST(ToDp, TieBreaksToSmallestOrder) {
  // delta = e^-1: eps(2) + 1/1 = 1.0 and eps(3) + 1/2 = 1.0 tie exactly.
  const OrderGrid grid({2.0, 3.0});
  const RdpCurve curve(grid, {0.0, 0.5});
  const DpGuarantee g = to_dp(curve, std::exp(-1.0));
  EXPECT_DOUBLE_EQ(g.epsilon, 1.0);
  EXPECT_DOUBLE_EQ(g.order, 2.0);
}

TEST(Ledger, CapacityUnderRepeatedGaussianCharges) {
  // Budget (20, 1e-6), per-query cost gaussian_rdp(sqrt(2), 5): exactly 109
  // charges fit; the 110th would cross 20.
  const OrderGrid grid = OrderGrid::defaults();
  BudgetLedger ledger(grid, Budget{20.0, 1e-6});
  const RdpCurve cost = gaussian_rdp(std::sqrt(2.0), 5.0, grid);
  int charges = 0;
  while (!ledger.would_exceed(cost)) {
    ledger.charge(cost);
    ++charges;
  }
  EXPECT_EQ(charges, 109);
  EXPECT_NEAR(ledger.spent().epsilon, 19.987755279, 1e-6);
  EXPECT_FALSE(ledger.exhausted());
  // Pre-commit never mutates: asking again gives the same refusal.
  EXPECT_TRUE(ledger.would_exceed(cost));
  EXPECT_NEAR(ledger.spent().epsilon, 19.987755279, 1e-6);
}

TEST(Ledger, SpentIsMonotoneInCharges) {
  const OrderGrid grid = OrderGrid::defaults();
  BudgetLedger ledger(grid, Budget{50.0, 1e-5});
  double last = ledger.spent().epsilon;
  for (int i = 0; i < 40; ++i) {
    ledger.charge(gaussian_rdp(1.0, 4.0 + i, grid));
    const double now = ledger.spent().epsilon;
    EXPECT_GE(now, last);
    last = now;
  }
}

TEST(Ledger, RestoreRoundTrip) {
  const OrderGrid grid = OrderGrid::defaults();
  BudgetLedger ledger(grid, Budget{10.0, 1e-4});
  ledger.charge(gaussian_rdp(std::sqrt(2.0), 7.0, grid));
  ledger.charge(gaussian_rdp(1.0, 3.0, grid));

  const BudgetLedger restored =
      BudgetLedger::restore(grid, ledger.budget(), ledger.accumulated().eps);
  EXPECT_EQ(restored.accumulated().eps, ledger.accumulated().eps);
  EXPECT_DOUBLE_EQ(restored.spent().epsilon, ledger.spent().epsilon);
}

TEST(Ledger, ValidatesInputs) {
  const OrderGrid grid = OrderGrid::defaults();
  EXPECT_THROW(BudgetLedger(grid, Budget{1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(BudgetLedger(grid, Budget{1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(BudgetLedger(grid, Budget{-1.0, 1e-6}), std::invalid_argument);

  BudgetLedger ledger(grid, Budget{1.0, 1e-6});
  const RdpCurve mismatched = RdpCurve::zero(OrderGrid({2.0}));
  EXPECT_THROW(ledger.charge(mismatched), std::invalid_argument);
  EXPECT_THROW((void)ledger.would_exceed(mismatched), std::invalid_argument);
  EXPECT_THROW(BudgetLedger::restore(grid, Budget{1.0, 1e-6}, {0.0}),
               std::invalid_argument);
}

TEST(Ledger, InfiniteCostIsNeverAffordable) {
  const OrderGrid grid = OrderGrid::defaults();
  BudgetLedger ledger(grid, Budget{1e9, 1e-6});
  EXPECT_TRUE(ledger.would_exceed(RdpCurve::infinite(grid)));
}

}  // namespace

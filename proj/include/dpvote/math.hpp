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

#ifndef DPVOTE_MATH_H_
#define DPVOTE_MATH_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dpvote {

inline constexpr double kPi = 3.14159265358979323846;

namespace internal {

// Rational Chebyshev approximations for erf/erfc after W. J. Cody,
// "Rational Chebyshev approximation for the error function",
// Math. Comp. 23 (1969), 631-638 (the netlib CALERF coefficient set).
// Accurate to ~18 significant decimals, well inside the 1e-12 relative
// error budget the analysis layer requires.
inline double calerf(double x, bool complement) {
  static const double a[5] = {3.1611237438705656, 113.864154151050156,
                              377.485237685302021, 3209.37758913846947,
                              0.185777706184603153};
  static const double b[4] = {23.6012909523441209, 244.024637934444173,
                              1282.61652607737228, 2844.23683343917062};
  static const double c[9] = {0.564188496988670089, 8.88314979438837594,
                              66.1191906371416295,  298.635138197400131,
                              881.95222124176909,   1712.04761263407058,
                              2051.07837782607147,  1230.33935479799725,
                              2.15311535474403846e-8};
  static const double d[8] = {15.7449261107098347, 117.693950891312499,
                              537.181101862009858, 1621.38957456669019,
                              3290.79923573345963, 4362.61909014324716,
                              3439.36767414372164, 1230.33935480374942};
  static const double p[6] = {0.305326634961232344, 0.360344899949804439,
                              0.125781726111229246, 0.0160837851487422766,
                              6.58749161529837803e-4, 0.0163153871373020978};
  static const double q[5] = {2.56852019228982242, 1.87295284992346047,
                              0.527905102951428412, 0.0605183413124413191,
                              0.00233520497626869185};
  static const double kSqrtPiInv = 0.56418958354775628695;
  static const double kThresh = 0.46875;
  static const double kXBig = 26.543;
  static const double kXSmall = 1.11e-16;

  const double y = std::fabs(x);
  double result;
  if (y <= kThresh) {
    // erf for |x| <= 0.46875.
    double ysq = y > kXSmall ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = x * (xnum + a[3]) / (xden + b[3]);
    return complement ? 1.0 - result : result;
  }
  if (y <= 4.0) {
    // erfc for 0.46875 < |x| <= 4.
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    const double ysq = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq) * (y + ysq);
    result *= std::exp(-ysq * ysq - del);
  } else if (y < kXBig) {
    // erfc for |x| > 4 via the asymptotic expansion.
    const double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
      xnum = (xnum + p[i]) * ysq;
      xden = (xden + q[i]) * ysq;
    }
    result = ysq * (xnum + p[4]) / (xden + q[4]);
    result = (kSqrtPiInv - result) / y;
    const double ysq2 = std::trunc(y * 16.0) / 16.0;
    const double del = (y - ysq2) * (y + ysq2);
    result *= std::exp(-ysq2 * ysq2 - del);
  } else {
    result = 0.0;
  }
  if (complement) {
    if (x < 0.0) result = 2.0 - result;
    return result;
  }
  return x < 0.0 ? result - 1.0 : 1.0 - result;
}

}  // namespace internal

inline double erfc(double x) { return internal::calerf(x, /*complement=*/true); }
inline double erf(double x) { return internal::calerf(x, /*complement=*/false); }

// Pairwise (cascade) summation; error grows O(log n) instead of O(n).
inline double pairwise_sum(const std::vector<double>& v) {
  struct Rec {
    static double sum(const double* data, std::size_t n) {
      if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
      }
      const std::size_t half = n / 2;
      return sum(data, half) + sum(data + half, n - half);
    }
  };
  return v.empty() ? 0.0 : Rec::sum(v.data(), v.size());
}

// Compensated (Kahan) accumulator for streaming sums.
class KahanAccumulator {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(exp(a) + exp(b)) without overflow; tolerates -inf arguments.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_binomial_coefficient(int n, int k) {
  if (n < 0 || k < 0 || k > n) {
    throw std::invalid_argument("log_binomial_coefficient: need 0 <= k <= n");
  }
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P[X = k] for X ~ Binomial(n, p), evaluated in log space.
inline double binomial_pmf(int n, double p, int k) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial_pmf: p outside [0, 1]");
  }
  if (k < 0 || k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double logp = log_binomial_coefficient(n, k) + k * std::log(p) +
                      (n - k) * std::log1p(-p);
  return std::exp(logp);
}

}  // namespace dpvote

#endif  // DPVOTE_MATH_H_

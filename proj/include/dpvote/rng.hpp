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

#ifndef DPVOTE_RNG_H_
#define DPVOTE_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

#include "dpvote/math.hpp"

namespace dpvote {

// splitmix64 finalizer; used only to derive stream keys, never as the
// generator itself.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Purpose tags keep independent draw sites on independent streams.
enum class Purpose : std::uint64_t {
  kVoteGen = 1,
  kThreshold = 2,
  kRelease = 3,
  kPowersetBin = 4,
  kTrial = 5,
};

// Derives a stream key from (master seed, query, label, purpose). Every
// random decision in the library flows through one of these streams, so a
// run is a pure function of the master seed.
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b, Purpose purpose) {
  std::uint64_t x = mix64(seed);
  x = mix64(x ^ a);
  x = mix64(x ^ b);
  x = mix64(x ^ static_cast<std::uint64_t>(purpose));
  return x;
}

class StreamRng {
 public:
  explicit StreamRng(std::uint64_t key) : engine_(key) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes exactly two uniforms per call, which keeps the
  // draw count (and therefore downstream reproducibility) explicit.
  double gaussian(double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dpvote

#endif  // DPVOTE_RNG_H_

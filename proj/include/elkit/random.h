// Copyright 2026 The elkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ELKIT_RANDOM_H_
#define ELKIT_RANDOM_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace elkit {

// SplitMix64 generator (Steele, Lea & Flood 2014): 64-bit state, output
// z = mix(state += 0x9E3779B97F4A7C15). All seeded stages draw from this
// generator and derive integers, doubles and permutations only through the
// member functions below, so sampled outputs are reproducible bit-for-bit
// by any implementation that follows the same recipe:
//
//   Uniform(n):  Lemire's multiply-shift with rejection on the low word.
//   Double():    (Next() >> 11) * 2^-53.
//   Shuffle:     Fisher-Yates from the back, j = Uniform(i + 1).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n). n must be positive.
  uint64_t Uniform(uint64_t n) {
    uint64_t x = Next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < n) {
      uint64_t threshold = -n % n;
      while (low < threshold) {
        x = Next();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1).
  double Double() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (one value per call).
  double Normal() {
    double u1 = 1.0 - Double();
    double u2 = Double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool Bernoulli(double p) { return Double() < p; }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = Uniform(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // Draws min(k, n) distinct items, in draw order (partial Fisher-Yates
  // from the front).
  template <typename T>
  std::vector<T> SampleWithoutReplacement(std::vector<T> items, size_t k) {
    k = std::min(k, items.size());
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + Uniform(items.size() - i);
      std::swap(items[i], items[j]);
    }
    items.resize(k);
    return items;
  }

 private:
  uint64_t state_;
};

}  // namespace elkit

#endif  // ELKIT_RANDOM_H_

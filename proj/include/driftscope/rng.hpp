/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <vector>

namespace driftscope {

// SplitMix64 finalizer. Used both as the mixing function for stream keys and
// as the step function of CounterRng.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hashes an ordered tuple of integers into a single 64-bit key.
inline std::uint64_t StreamKey(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = Mix64(h ^ Mix64(p + 0x9e3779b97f4a7c15ULL));
  return h;
}

// Counter-based generator: the stream is fully determined by its key, so
// records, resamples and trees can be drawn in any order or on any thread.
// All distributions are implemented here (not via <random>) so the bits do
// not depend on the standard library vendor.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::initializer_list<std::uint64_t> parts)
      : key_(StreamKey(parts)) {}

  std::uint64_t NextU64() { return Mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1); safe for logarithms.
  double UniformOpen() {
    return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Lemire-style rejection keeps it unbiased.
  std::uint64_t Below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = NextU64();
    } while (x >= limit);
    return x % n;
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller; the second variate is discarded so every call consumes
  // exactly two draws.
  double Normal() {
    const double u1 = UniformOpen();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  double Normal(double mean, double sd) { return mean + sd * Normal(); }

  double Exponential(double mean) { return -mean * std::log(UniformOpen()); }

  // Gamma with integer shape, as a sum of unit exponentials.
  double GammaInt(int shape) {
    double s = 0.0;
    for (int i = 0; i < shape; ++i) s += -std::log(UniformOpen());
    return s;
  }

  // Beta(a, b) for integer a, b via the gamma ratio.
  double BetaInt(int a, int b) {
    const double x = GammaInt(a);
    const double y = GammaInt(b);
    return x / (x + y);
  }

  // Poisson by multiplication of uniforms; fine for small means.
  int Poisson(double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = Uniform();
    while (prod > limit) {
      ++k;
      prod *= Uniform();
    }
    return k;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// k distinct indices from [0, n), ascending. Partial Fisher-Yates.
inline std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k,
                                              std::uint64_t key) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (k >= n) return pool;
  CounterRng rng(key);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace driftscope

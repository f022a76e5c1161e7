/*
 * Copyright 2026 The CLTR Robustness Toolkit Authors.
 *
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

#ifndef CLTR_RANDOM_HPP_
#define CLTR_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cltr {

// Seeded random source with portable derived distributions.
//
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so every draw used by the toolkit is derived from
// raw engine output here. Logs and checkpoints are then identical across
// standard library implementations.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer; a bijective bit mixer.
std::uint64_t mix64(std::uint64_t x);

// Seed of an independent substream keyed by (seed, key).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

// Lowercase 16-digit hex rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

}  // namespace cltr

#endif  // CLTR_RANDOM_HPP_

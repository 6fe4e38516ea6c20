// Copyright 2026 The HSD Authors.
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

#ifndef HSD_RNG_H_
#define HSD_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace hsd {

// Seeded generator. Draws are computed from raw mt19937_64 output so that
// sequences are identical on every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via Box-Muller.
  double Normal();

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent sub-seed from a master seed, a purpose name and an
// index (e.g. fold number). Stable across runs and platforms.
uint64_t DeriveSeed(uint64_t master, std::string_view name, uint64_t index = 0);

// FNV-1a 64-bit hash of a byte string.
uint64_t Fnv1a64(std::string_view bytes);

}  // namespace hsd

#endif  // HSD_RNG_H_

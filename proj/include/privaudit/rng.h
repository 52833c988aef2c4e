// Copyright 2026 The Privaudit Authors
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

#ifndef PRIVAUDIT_RNG_H_
#define PRIVAUDIT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace privaudit {

// Mixes a salt into a seed (splitmix64 finalizer). Used to derive independent
// stream seeds, e.g. per run, per record, per purpose.
uint64_t MixSeed(uint64_t seed, uint64_t salt);
uint64_t MixSeed(uint64_t seed, uint64_t salt_a, uint64_t salt_b);

// FNV-1a over raw bytes. Record identities are hashes of the feature bytes.
uint64_t Fnv1aHash(const void* data, std::size_t len);

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact per
// the C++ standard); the uniform/gaussian conversions are implemented here so
// that generated values do not depend on the standard library's distribution
// internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform double in [0, 1), 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method.
  double Gaussian();

  // Uniform integer in [0, n). Requires n > 0.
  int64_t UniformInt(int64_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace privaudit

#endif  // PRIVAUDIT_RNG_H_

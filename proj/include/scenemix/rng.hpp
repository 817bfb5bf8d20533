// Copyright 2026 The scenemix Authors
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

#ifndef SCENEMIX__RNG_HPP_
#define SCENEMIX__RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace scenemix
{

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stream seed for one frame. Independent of processing order or worker count.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view frame_id, std::string_view stream);

/**
 * Deterministic generator. Distributions are implemented here rather than with
 * the <random> distribution templates, whose outputs are library-specific; the
 * engine itself (mt19937_64) is fully specified by the standard.
 */
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller.
  double normal();

private:
  std::mt19937_64 engine_;
};

}  // namespace scenemix

#endif  // SCENEMIX__RNG_HPP_

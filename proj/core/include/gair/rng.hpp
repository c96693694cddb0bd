/*
 * Copyright 2026 The gairlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace gair {

/// xoshiro256** generator seeded through splitmix64.
///
/// Owned by the project so every dataset, initialization and random start is
/// bit-stable across platforms and standard-library versions. Normal variates
/// use the Box-Muller transform and never cache the second variate, so the
/// full generator state is the four words returned by state().
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream keyed by a seed and a path of stream identifiers
  /// (epoch, batch, example, ...). Pure function of its arguments.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal variate.
  double normal();

  const State& state() const noexcept { return state_; }
  void set_state(const State& state) noexcept { state_ = state; }

 private:
  State state_{};
};

/// One splitmix64 scrambling step; exposed for stream derivation.
std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace gair

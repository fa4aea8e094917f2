// Copyright 2026 The MoNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace monet {

/// Seeded generator used for every random choice in the project.
///
/// The stream is xoshiro256** seeded through SplitMix64. Uniform reals take
/// the top 53 bits, bounded integers use rejection sampling, and normals use
/// the Box-Muller transform (one draw per pair of uniforms, no caching), so
/// output is reproducible wherever the libm transcendental functions agree.
///
/// split() derives an independent sub-stream keyed by an integer label. The
/// derivation only reads the original seed, not the current state, so
/// sub-streams are stable no matter how much of the parent was consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal.
  double normal();
  /// +1 or -1 with equal probability.
  int sign();

  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// SplitMix64 finalizer; exposed for seed derivation.
std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace monet

// Copyright 2026 The graspkit Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "graspkit/common.hpp"

namespace graspkit {

/// Random stream with portable distributions. The engine is mt19937_64,
/// whose output sequence is fixed by the standard; the distributions are
/// implemented here so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (one draw per call).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
};

/// Stateless seed derivation. Each child is a pure function of the parent
/// seed and the label, so parallel workers can derive their streams without
/// sharing state.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t master) : seed_(master) {}

  SeedTree child(std::string_view label) const;
  SeedTree child(std::uint64_t index) const;

  std::uint64_t value() const { return seed_; }
  Rng rng() const { return Rng(seed_); }

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace graspkit

// Copyright 2026 The EVE Authors. All Rights Reserved.
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

namespace eve {

/// Deterministic random stream. All randomness in the library flows from a
/// single global seed split into named sub-streams ("data", "init",
/// "dropout", "sampling", ...), so that changing one consumer never perturbs
/// another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// A child stream whose seed depends only on (this seed, name).
  Rng derive(std::string_view name) const;
  /// A child stream for an indexed consumer, e.g. one per epoch.
  Rng derive(std::string_view name, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace eve

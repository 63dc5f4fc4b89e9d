// Copyright 2026 The PartPose Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace partpose {

// Pipeline stages that consume randomness. The numeric values are part of
// the archive contract: changing them changes every derived seed.
enum class Stage : std::uint32_t {
  kFarthestPointStart = 1,
  kSurfacePresample = 2,
  kJointConfig = 3,
  kObjectCamera = 4,
  kPartCamera = 5,
  kCollisionSurface = 6,
  kBenchmark = 7,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based split of a root seed:
///   seed(root, stage, i) = mix64(root + 0x9E3779B97F4A7C15 * ((stage << 32) + i + 1))
/// Every (stage, index) pair gets an independent stream, so any stage can be
/// replayed without running the ones before it.
std::uint64_t derive_seed(std::uint64_t root, Stage stage, std::uint64_t index = 0);

// Thin wrapper over mt19937_64 with platform-independent real mapping
// (std::uniform_real_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace partpose

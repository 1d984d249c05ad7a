// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The turnpoint Authors

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace turnpoint {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a key path,
/// e.g. (seed, tag, grid_index, trial_index). Execution order never enters.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed);
  for (const auto k : keys) h = mix64(h ^ mix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

/// A deterministic random stream keyed by (seed, keys...).
class Stream {
 public:
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) : engine_(derive_seed(seed, keys)) {}

  /// Uniform in [0, 1).
  double uniform() { return uniform_(engine_); }
  double normal(double mean, double sigma) {
    if (sigma == 0.0) return mean;
    return std::normal_distribution<double>(mean, sigma)(engine_);
  }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Stream tags keep unrelated draws from sharing a stream.
namespace stream_tag {
inline constexpr std::uint64_t kProperLogits = 1;
inline constexpr std::uint64_t kOutcomes = 2;
inline constexpr std::uint64_t kTokenChoice = 3;
inline constexpr std::uint64_t kSynthProblem = 4;
inline constexpr std::uint64_t kSynthOutcomes = 5;
inline constexpr std::uint64_t kSubsample = 6;
inline constexpr std::uint64_t kStability = 7;
}  // namespace stream_tag

}  // namespace turnpoint

#pragma once

#include <cstdint>
#include <random>

namespace dbmatch {

/// Independent randomness streams derived from one seed. The numeric values
/// are part of the reproducibility contract and must not be renumbered.
enum class Stream : std::uint64_t {
  kDatabase = 1,
  kDeletion = 2,
  kDetection = 3,
  kLabeling = 4,
  kSeedBatch = 5,
  kTargetRow = 6,
  kCollision = 7,
  kSeedRows = 8,
  kChannel = 9,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based split: child = mix(mix(mix(seed) ^ a) ^ b). Children of
/// distinct (a, b) are statistically independent and do not depend on the
/// order in which they are requested.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

inline std::uint64_t split_seed(std::uint64_t seed, Stream s, std::uint64_t b = 0) noexcept {
  return split_seed(seed, static_cast<std::uint64_t>(s), b);
}

/// mt19937_64 with platform-stable variate generation (the std distributions
/// are implementation-defined, so they are avoided here).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  /// Uniform on [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dbmatch

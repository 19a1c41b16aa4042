#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ggo {

/// Seedable random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so bounded integers,
/// uniform reals and normals are derived here directly from the raw 64-bit
/// stream. Independent streams (per agent, per candidate, per run) are
/// obtained with derive_seed() rather than by sharing one engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the sub-stream identified by `path` under `base`.
/// derive_seed(s, {a, b}) differs from derive_seed(s, {b, a}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

}  // namespace ggo

#pragma once

#include <cstdint>
#include <random>

namespace mblq {

/// Mixes (master, index) into an independent 64-bit seed.
///
/// Counter-based: the result depends only on its arguments, so a worker
/// handling realization i derives the same stream no matter how work is
/// scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Two-level variant used for (step, candidate) style addressing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t sub_index);

/// A single-owner random stream. Copying clones the stream state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second variate).
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mblq

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgefed {

/// Seeded random stream. Each purpose (pricing jitter, tariff assignment, ...)
/// draws from its own stream keyed by (seed, stream label, run index), so adding
/// a new consumer of randomness never shifts the values of existing streams.
///
/// Only the engine output is used; conversion to doubles is done here rather
/// than through <random> distributions, whose results are implementation-defined.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::string_view stream_id, std::uint64_t run = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t derived_seed() const { return derived_; }

 private:
  std::uint64_t derived_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; also used to mix seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace edgefed

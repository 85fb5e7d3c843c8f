#pragma once

#include <cstdint>
#include <random>

namespace hippoicl {

/**
 * Seedable generator with a portable output stream.
 *
 * The engine is std::mt19937_64, whose sequence is fixed by the C++ standard.
 * The distribution transforms are implemented here rather than taken from
 * <random>, whose distributions are implementation-defined, so the same seed
 * yields the same numbers with any standard library:
 *   uniform(): top 53 bits of one draw, scaled to [0, 1);
 *   normal():  Box-Muller on two uniforms, the second variate cached.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hippoicl

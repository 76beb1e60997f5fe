#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lrmr {

/// Seeded generator used by every randomized routine in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Uniform and normal variates are derived from raw engine output
/// by hand (53-bit mantissa fill, Box-Muller) rather than through the
/// std distributions, whose algorithms differ between standard libraries.
/// Outputs are therefore reproducible on every platform.
///
/// Streams: a child stream for `(seed, stream)` is seeded with
/// `mix(seed ^ mix(stream + 1))`, where `mix` is the splitmix64 finalizer.
/// Code that needs independent randomness per column, trial or purpose asks
/// for a distinct stream id instead of sharing a generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Generator for an independent stream derived from `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed ^ mix(stream + 1));
  }

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// Standard normal variate.
  double normal();

  /// `count` distinct integers from [0, population), uniformly without
  /// replacement, returned in ascending order.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population,
                                                        std::uint64_t count);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lrmr

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <utility>

namespace stabsel {

/// SplitMix64 finalizer. Bijective 64-bit mixer used for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a sequence of tags,
/// e.g. derive_seed(seed, {cohort, subject}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) noexcept;
std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t h = 0xCBF29CE484222325ULL) noexcept;
std::uint64_t fnv1a_double(double value, std::uint64_t h = 0xCBF29CE484222325ULL) noexcept;

/// xoshiro256** generator (Blackman & Vigna), state seeded by SplitMix64.
///
/// All distribution transforms are implemented here rather than through
/// <random> distributions, whose algorithms are implementation-defined; the
/// output stream is therefore identical on every platform for a given seed.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }
  result_type next() noexcept;

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (second variate cached).
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates shuffle.
  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) noexcept {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace stabsel

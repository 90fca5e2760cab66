#include "stabsel/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace stabsel {

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix64(base);
  for (auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x632BE59BD9B4E019ULL));
  return h;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t h) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xFFU;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t fnv1a_double(double value, std::uint64_t h) noexcept {
  if (value == 0.0) value = 0.0;  // fold -0.0
  return fnv1a_u64(std::bit_cast<std::uint64_t>(value), h);
}

namespace {
constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    s = splitmix64(x);
    x += 0x9E3779B97F4A7C15ULL;
  }
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

__extension__ using u128 = unsigned __int128;

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless method.
  u128 m = static_cast<u128>(next()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace stabsel

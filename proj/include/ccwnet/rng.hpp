#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace ccwnet {

// All randomness flows through std::mt19937_64. Streams are keyed by
// derive_seed(master, ...), a splitmix64 fold, so every stage of every
// replicate owns an independent generator regardless of scheduling.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ull));
  return h;
}

/// Stage tags for derive_seed.
enum class Stream : std::uint64_t {
  kSample = 1,
  kSummary = 2,
  kSplit = 3,
  kGridCell = 4,
  kShuffle = 5,
  kOracle = 6,
};

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

/// Uniform on [0, 1) with 53 random bits; portable across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, hi]: a draw of exactly zero maps to the smallest positive double.
inline double uniform_open_low(Rng& rng, double hi) {
  double u = hi * (1.0 - uniform01(rng));
  return u > 0.0 ? u : std::numeric_limits<double>::denorm_min();
}

/// Standard normal via Box-Muller, so results do not depend on the
/// library's normal_distribution.
inline double standard_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925;
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Uniform integer in [0, n) by rejection, for portable Fisher-Yates shuffles.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

template <class It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    std::swap(first[i - 1], first[uniform_index(rng, i)]);
  }
}

}  // namespace ccwnet

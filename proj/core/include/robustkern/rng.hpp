#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace robustkern {

// SplitMix64 (Steele, Lea & Flood; Vigna's fixed-increment variant).
// 64 bits of state, one multiply-xorshift finalizer per output. The
// finalizer decorrelates nearby seeds, which makes it suitable both as a
// generator and as the mixing function for stream derivation below.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); rejects the single zero outcome.
  double uniform_open01() noexcept {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  // Unbiased integer on {0, ..., bound-1} (Lemire's multiply-and-reject).
  std::uint64_t bounded(std::uint64_t bound) noexcept {
    unsigned __int128 m =
        static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(bound);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Gaussian via Box-Muller (cosine branch). Two uniforms per draw keeps
  // the generator stateless beyond `state_`, so streams stay reproducible.
  double normal(double mean, double stddev) noexcept {
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Standard Laplace(0,1) by inverting the centered CDF.
  double laplace() noexcept {
    return laplace_from_uniform(uniform_open01() - 0.5);
  }

  // Geometric on {0,1,2,...} with success probability p in (0,1).
  std::uint64_t geometric(double p) noexcept {
    const double u = uniform01();
    return static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  // Inverse CDF of Laplace(0,1) parameterized by u in (-1/2, 1/2):
  // zeta = -sign(u) * ln(1 - 2|u|). Exposed for direct testing.
  static double laplace_from_uniform(double u) noexcept {
    const double sign = (u >= 0.0) ? 1.0 : -1.0;
    return -sign * std::log1p(-2.0 * std::abs(u));
  }

 private:
  std::uint64_t state_;
};

// Sub-stream tags. One root seed feeds several independent streams so that
// e.g. drawing DP noise never perturbs the permutation draws at that seed.
enum class Stream : std::uint64_t {
  kPermutations = 1,
  kNoise = 2,
  kData = 3,
  kAttack = 4,
  kTest = 5,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Derives a sub-stream seed by folding tags into the root seed, one
// finalizer application per tag. derive(s, a, b) != derive(s, b, a) in
// general, so tag order is part of the stream identity.
inline std::uint64_t derive_stream(std::uint64_t root,
                                   std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = root;
  for (std::uint64_t tag : tags) {
    h = detail::mix64(h + 0x9e3779b97f4a7c15ULL * (tag + 1));
  }
  return h;
}

inline std::uint64_t derive_stream(std::uint64_t root, Stream stream) noexcept {
  return derive_stream(root, {static_cast<std::uint64_t>(stream)});
}

}  // namespace robustkern

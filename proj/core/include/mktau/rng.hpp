#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "mktau/errors.hpp"

namespace mktau {

/// Counter-based splittable pseudo-random generator (SplitMix64 family).
///
/// The state is a counter advanced by a per-stream odd increment; each output
/// is a bijective mix of the counter, so the stream is fully determined by
/// (seed, gamma). stream() derives statistically independent generators from
/// a master seed and integer ids, which is how parallel replications get
/// reproducible disjoint streams. All draws are deterministic functions of
/// the construction arguments and the draw order.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t gamma = kGoldenGamma)
      : state_(seed), gamma_(gamma | 1u) {}

  /// Keyed derivation of an independent stream, e.g. stream(master, rep)
  /// for the rep-th replication or stream(master, rep, 1) for a substream.
  static Rng stream(std::uint64_t master_seed, std::uint64_t id0, std::uint64_t id1 = 0) {
    std::uint64_t s = mix64(master_seed + kGoldenGamma * (id0 + 1));
    std::uint64_t g = mix_gamma(mix64(s + kGoldenGamma * (id1 + 1)));
    return Rng(mix64(s ^ g), g);
  }

  /// Child stream split off the current position: seed and gamma are both
  /// drawn from this stream, so nested splits need no coordination.
  Rng split() {
    std::uint64_t s = next_u64();
    std::uint64_t g = mix_gamma(next_u64());
    return Rng(s, g);
  }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix64(state_);
  }

  /// Uniform on [0,1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ParamError("Rng::below requires n >= 1");
    if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  /// Standard normal via Box-Muller; draws pairs and caches the second value.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * uniform01();
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  /// Chi-square with integer degrees of freedom, as a sum of squared normals.
  double chi_squared(unsigned df) {
    if (df == 0) throw ParamError("chi_squared requires df >= 1");
    double acc = 0.0;
    for (unsigned i = 0; i < df; ++i) {
      double z = normal();
      acc += z * z;
    }
    return acc;
  }

private:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Gamma must be odd with enough bit transitions to behave well.
  static std::uint64_t mix_gamma(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDull;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ull;
    z = (z ^ (z >> 33)) | 1u;
    if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xAAAAAAAAAAAAAAAAull;
    return z;
  }

  std::uint64_t state_;
  std::uint64_t gamma_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace mktau

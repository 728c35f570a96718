#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace iflab {

// Counter-based random stream. The state walks the SplitMix64 sequence from
// a start point derived by mixing (seed, stream), so a stream is fully
// determined by those two integers: trial t of a run always sees the same
// draws no matter how trials are scheduled over threads.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = mix(seed + 0x9e3779b97f4a7c15ull);
    const std::uint64_t b = mix(stream + 0xbf58476d1ce4e5b9ull);
    state_ = mix(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], both endpoints included. Unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % span + 1u) % span;
    std::uint64_t x = next_u64();
    if (rem != 0) {
      while (x >= std::uint64_t(0) - rem) x = next_u64();
    }
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> gaussian_pair() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  double gaussian() { return gaussian_pair().first; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

}  // namespace iflab

#pragma once

#include <cmath>
#include <cstdint>

namespace ctg {

/// splitmix64. Used instead of std:: engines/distributions so that seeded
/// output is identical across standard libraries.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }
};

/// Box-Muller gaussian on top of SplitMix64.
struct GaussianRng {
  SplitMix64 rng;
  bool have_spare = false;
  double spare = 0.0;

  explicit GaussianRng(std::uint64_t seed = 0) : rng(seed) {}

  double next(double sigma) {
    if (sigma <= 0.0) return 0.0;
    if (have_spare) {
      have_spare = false;
      return spare * sigma;
    }
    double u = rng.next_unit();
    if (u <= 0.0) u = 0x1.0p-53;
    const double v = rng.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * M_PI * v;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a) * sigma;
  }
};

}  // namespace ctg

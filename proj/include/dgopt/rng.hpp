#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dgopt {

/// Deterministic RNG helper. Draws come from std::mt19937_64, whose output
/// sequence is pinned bit-exactly by the standard; the distributions below
/// are hand-rolled (the std::*_distribution algorithms are
/// implementation-defined, which would break reproducibility across
/// toolchains).
class Rng {
 public:
  explicit Rng(uint64_t seed) : g_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return double(g_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559005768 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Unbiased integer in [0, n), n >= 1, by rejection.
  uint64_t below(uint64_t n) {
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = g_();
    } while (x >= lim);
    return x % n;
  }

  bool coin() { return (g_() & 1) != 0; }

 private:
  std::mt19937_64 g_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dgopt

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace svcache {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// mt19937_64 with hand-rolled inverse-transform samplers so draw sequences
/// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  /// Independent stream for (seed, stream_id); used for per-trial parallelism.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(splitmix64(seed) + 0x9E3779B97F4A7C15ULL * (stream_id + 1));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1).
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double u01_open_left() { return 1.0 - u01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Exp(1): squared magnitude of a unit-variance complex Gaussian (Rayleigh power).
  double exponential() { return -std::log(u01_open_left()); }

  bool bernoulli(double p) { return u01() < p; }

  /// Knuth product method, chunked so exp(-mean) never underflows.
  std::uint64_t poisson(double mean) {
    std::uint64_t n = 0;
    while (mean > 500.0) {
      n += poisson_knuth(500.0);
      mean -= 500.0;
    }
    return n + poisson_knuth(mean);
  }

 private:
  std::uint64_t poisson_knuth(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = u01_open_left();
    while (prod > limit) {
      ++k;
      prod *= u01_open_left();
    }
    return k;
  }

  std::mt19937_64 eng_;
};

}  // namespace svcache

#ifndef STABCAP_RNG_HPP
#define STABCAP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

#include "stabcap/errors.hpp"

namespace stabcap {

// SplitMix64 step (Steele et al., "Fast splittable pseudorandom number
// generators"). All randomness in the library flows through this generator so
// that results are bit-reproducible across platforms for a fixed seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic stream of doubles/integers with an explicit state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so that nearby seeds decorrelate quickly.
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  // Integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller. Always consumes exactly two uniforms so
  // replay does not depend on call history.
  double gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }

  double truncated_gaussian(double mu, double sigma, double lo, double hi) {
    if (!(lo < hi)) throw InputError("truncated_gaussian: requires lo < hi");
    for (int attempt = 0; attempt < 1000000; ++attempt) {
      const double x = gaussian(mu, sigma);
      if (x >= lo && x <= hi) return x;
    }
    throw NumericError("truncated_gaussian: rejection sampling failed; truncation window too deep in the tail");
  }

 private:
  std::uint64_t state_;
};

// Substream seed for unit `index` of a run keyed by `master`. Trajectories,
// channel trials and similar parallel units each get substream(master, i), so
// sampling is independent of evaluation order.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (index + 1));
  return splitmix64(s);
}

}  // namespace stabcap

#endif

// rng.hpp - deterministic random streams.
//
// Distribution sampling is implemented here instead of <random> distributions
// so that a fixed seed produces identical byte streams across standard library
// implementations (std::normal_distribution is implementation-defined).
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "navsim/core.hpp"

namespace navsim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one draw discarded; determinism over speed).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  Vector3d normal3(double sigma) {
    return Vector3d(normal(), normal(), normal()) * sigma;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Poisson sample; Knuth for small means, normal approximation for large.
  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
      const double l = std::exp(-lambda);
      long k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > l);
      return k - 1;
    }
    const double x = normal(lambda, std::sqrt(lambda));
    return x > 0.0 ? static_cast<long>(std::llround(x)) : 0;
  }

  // Uniform direction on the unit sphere.
  Vector3d unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vector3d(s * std::cos(phi), s * std::sin(phi), z);
  }

 private:
  std::mt19937_64 engine_;
};

// Independent per-sample stream derived from (master seed, stream index).
inline Rng derive_stream(std::uint64_t master_seed, std::uint64_t index) {
  // splitmix64 over the combined key decorrelates consecutive indices.
  std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return Rng(z);
}

}  // namespace navsim

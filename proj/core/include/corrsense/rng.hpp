#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "corrsense/errors.hpp"

namespace corrsense {

/// Deterministic random stream (xoshiro256** core, SplitMix64-style seeding).
///
/// All stochastic code in this library draws from explicit Rng streams with
/// hand-rolled distributions, so that identical seeds give bit-identical
/// results on every platform and the per-probe derived streams promised by
/// the measurement contracts stay schedule-independent. The standard
/// library's distribution objects are implementation-defined and would break
/// both guarantees.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  /// Derive an independent stream from (master, a, b): used for per-probe /
  /// per-repetition streams so parallel schedules cannot change results.
  static Rng derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(derive_seed(master, a, b));
  }

  /// The seed value derive() would use; exposed so measurement records can
  /// carry the exact stream identity that produced them.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b = 0) {
    std::uint64_t x = mix64(master ^ (0x9e3779b97f4a7c15ULL + a));
    x = mix64(x ^ (0xbf58476d1ce4e5b9ULL + b));
    return x;
  }

  void reseed(std::uint64_t seed) {
    // xoshiro must not start at the all-zero state; the mix chain below is a
    // composition of bijections, so at most one seed could ever produce it,
    // and the golden-ratio offsets keep nearby seeds decorrelated.
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = mix64(x);
      s = x;
    }
    have_spare_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("uniform_below: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Count of successes in n Bernoulli(p) trials (plain summation: exact
  /// distribution, deterministic draw count per trial).
  long binomial(long n, double p) {
    long k = 0;
    for (long i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  /// Standard normal via the polar method (cached spare deviate).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace corrsense

#pragma once

#include "martlab/prob_space.hpp"

#include <cmath>
#include <cstdint>

namespace martlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-instance stream seed; keeps parallel corpus runs independent of
/// evaluation order.
inline std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t id) {
  std::uint64_t s = base ^ (0x5851f42d4c957f2dULL * (id + 1));
  return splitmix64(s);
}

/// xoshiro256++ with hand-rolled distributions, so corpora are reproducible
/// bit for bit across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t nextU64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  Index uniformInt(Index n) {
    return static_cast<Index>(static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(nextU64()) * static_cast<__uint128_t>(n)) >> 64));
  }

  /// Box-Muller; burns two uniforms per draw to stay stateless.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Marsaglia-Tsang.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      const double u = uniform();
      return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Symmetric Dirichlet(alpha) over n cells.
  Vec dirichlet(Index n, double alpha) {
    Vec w(n);
    for (Index i = 0; i < n; ++i) w[i] = gamma(alpha);
    const double total = w.sum();
    if (!(total > 0.0)) return Vec::Constant(n, 1.0 / static_cast<double>(n));
    return w / total;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace martlab

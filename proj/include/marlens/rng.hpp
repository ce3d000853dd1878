#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace marlens {

/// Seeded generator with portable integer/real draws. The standard
/// distributions are implementation-defined, so trajectories produced
/// through them would differ across standard libraries; these helpers
/// pin the exact draw algorithm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  int uniform_int(int n) {
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % static_cast<std::uint64_t>(n));
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= bound);
    return static_cast<int>(r % static_cast<std::uint64_t>(n));
  }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_range(int lo, int hi) { return lo + uniform_int(hi - lo + 1); }

  /// Uniform real in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (polar form avoided to keep the
  /// draw count per call fixed at two).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Derives an independent stream; used to split train/eval RNGs.
  Rng split(std::uint64_t stream) {
    return Rng(engine_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

} // namespace marlens

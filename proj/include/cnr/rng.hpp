#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "cnr/errors.hpp"

namespace cnr {

// Seeded random stream with hand-fixed sampling transforms so that a given
// seed produces the same draws on every platform and standard library. The
// engine is mt19937_64; only the raw 64-bit output of the engine is relied
// on, never the distribution classes of <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via the Box-Muller transform; consumes two uniforms
  // every other call and caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTau * u2);
    have_spare_ = true;
    return r * std::cos(kTau * u2);
  }

  // Uniform integer on [0, bound); rejection keeps the draw unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw InvalidInput("Rng::below: bound must be positive");
    const std::uint64_t max64 = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max64 % bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = engine_();
      if (x <= max64 - rem) return x % bound;
    }
  }

 private:
  static constexpr double kTau = 6.283185307179586476925286766559;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cnr

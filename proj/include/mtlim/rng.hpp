#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mtlim {

// Deterministic random source used by every sampling routine in the library.
//
// std::mt19937_64 has a fully specified algorithm, but the standard
// distribution adaptors (<random>'s uniform_real_distribution,
// normal_distribution, ...) are implementation-defined, so the few
// transformations we need are pinned here.  Two runs with the same seed
// produce bit-identical streams on any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to feed into log().
  double uniform01_open_low() { return 1.0 - uniform01(); }

  // Standard normal via Box-Muller.  Consumes two uniforms per pair and
  // caches the second draw.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586476925287;
    double u = uniform01_open_low();
    double v = uniform01();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(two_pi * v);
    have_spare_ = true;
    return r * std::cos(two_pi * v);
  }

  // Fair coin from the generator's low bit.
  bool bernoulli_half() { return (gen_() & 1ull) != 0; }

  // Uniform integer in [0, n).  Modulo bias is irrelevant for the small n
  // used here and keeps the draw count per call fixed at one.
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mtlim

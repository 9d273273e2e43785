#pragma once

// Deterministic splittable generator (splitmix64 core). Every random
// quantity in the lab derives from a single config seed through named
// substreams, Rng(seed).stream(purpose, index), so results never depend on
// evaluation order or platform RNG internals. Stream layout used by the
// CLI and the test suites:
//
//   purpose 0  trial signals        (index = trial number)
//   purpose 1  dataset members      (index = sample number)
//   purpose 2  filter banks         (index = filter number)
//   purpose 3  comparison bases     (index = basis number)
//   purpose 4  scalar parameters    (index = use site)

#include <cmath>
#include <complex>
#include <cstdint>

namespace invlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return scramble(state_);
  }

  // Derives a decorrelated child stream; does not advance this generator.
  Rng stream(std::uint64_t purpose, std::uint64_t index = 0) const {
    std::uint64_t s = scramble(state_ + 0x9E3779B97F4A7C15ull * (purpose + 1));
    s = scramble(s + 0xD1B54A32D192ED03ull * (index + 1));
    return Rng(s);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the partner draw is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::complex<double> cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  std::uint64_t below(std::uint64_t n) { return u64() % n; }

 private:
  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace invlab

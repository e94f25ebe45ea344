#pragma once

#include <complex>
#include <cstdint>

namespace afdmscma {

// Counter-friendly PRNG: splitmix64 core, Box-Muller normals.
// std:: distributions are deliberately avoided so that streams are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) via rejection-free scaling (bound is tiny
  // relative to 2^64 in all uses here, so modulo bias is negligible; still
  // use the multiply-shift trick for cleanliness).
  uint64_t uniform_int(uint64_t bound) {
    return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * bound) >> 64);
  }

  // Standard normal, Box-Muller, second variate cached.
  double gaussian();

  // Circularly symmetric complex Gaussian with E|x|^2 = variance.
  std::complex<double> cgaussian(double variance);

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Order-sensitive seed combiner for (run, point, trial, stream) hierarchies.
uint64_t mix_seed(uint64_t a, uint64_t b);

// e^{+j 2 pi turns}, evaluated in long double and reduced mod 1 first.
// Keeping phases in turns (not radians) is what holds transform unitarity
// near machine precision for large quadratic phase arguments.
std::complex<double> cis_turns(long double turns);

}  // namespace afdmscma

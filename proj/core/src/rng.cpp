#include "afdmscma/rng.hpp"

#include <cmath>

namespace afdmscma {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1]: shift by one ulp-ish step so log() is finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  double r = std::sqrt(-2.0 * std::log(u1));
  double c = std::cos(2.0 * M_PI * u2);
  double s = std::sin(2.0 * M_PI * u2);
  spare_ = r * s;
  has_spare_ = true;
  return r * c;
}

std::complex<double> Rng::cgaussian(double variance) {
  double scale = std::sqrt(variance / 2.0);
  return {scale * gaussian(), scale * gaussian()};
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over an asymmetric combination.
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::complex<double> cis_turns(long double turns) {
  long double t = std::fmod(turns, 1.0L);
  long double angle = 2.0L * 3.14159265358979323846264338327950288L * t;
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

}  // namespace afdmscma

#pragma once

#include <cstdint>
#include <random>

#include "polarlens/detail/special.hpp"

namespace polarlens::detail {

// splitmix64 step, used to derive independent stream seeds.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ull + 1));
}

// Deterministic generator: the standard distributions are
// implementation-defined, so uniform and normal transforms are explicit and
// the same bits come out on every toolchain.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  // uniform on [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1), symmetric, never 0 or 1
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // integer in [0, n)
  uint64_t below(uint64_t n) {
    // modulo bias is < 2^-40 for the n used here; acceptable for synthesis
    return n == 0 ? 0 : eng_() % n;
  }

  double normal() { return normal_quantile(uniform01_open()); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace polarlens::detail

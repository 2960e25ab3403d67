#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "polarlens/detail/rng.hpp"

using polarlens::detail::derive_seed;
using polarlens::detail::Rng;

TEST_CASE("rng determinism and bounds", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform01();
    CHECK(u == b.uniform01());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(43);
  CHECK(Rng(42).uniform01() != c.uniform01());
}

TEST_CASE("open uniform never hits the ends", "[rng]") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform01_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments", "[rng]") {
  Rng r(20260816);
  const int n = 50000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    sum += z;
    sq += z * z;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("derived seeds differ per stream", "[rng]") {
  std::vector<uint64_t> seen;
  for (uint64_t s = 0; s < 64; ++s) seen.push_back(derive_seed(99, s));
  for (size_t i = 0; i < seen.size(); ++i)
    for (size_t j = i + 1; j < seen.size(); ++j) CHECK(seen[i] != seen[j]);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

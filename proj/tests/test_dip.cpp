#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "polarlens/stats.hpp"

using namespace polarlens;
using Catch::Approx;

namespace {

const std::vector<double> kBimodal10 = {0.0,  0.02, 0.04, 0.06, 0.08,
                                        0.9,  0.92, 0.94, 0.96, 1.0};
const std::vector<double> kMixed10 = {1.0, 1.1, 1.2,  3.0, 3.05,
                                      3.1, 3.15, 5.0, 5.5, 9.0};
const std::vector<double> kTied12 = {1, 1, 1, 2, 2, 5, 5, 5, 8, 8, 8, 8};

}  // namespace

TEST_CASE("dip statistic reproduces stored oracle values", "[dip]") {
  CHECK(stats::dip_statistic({0.0, 1.0}) == Approx(0.25).epsilon(1e-14));
  CHECK(stats::dip_statistic({0.0, 0.5, 1.0}) ==
        Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(stats::dip_statistic({0.0, 0.0, 1.0}) ==
        Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(stats::dip_statistic({0.0, 0.01, 100.0, 100.01}) ==
        Approx(0.249975).epsilon(1e-12));
  CHECK(stats::dip_statistic({0.0, 1.0, 2.0, 3.0}) ==
        Approx(0.125).epsilon(1e-14));

  std::vector<double> ramp;
  for (int i = 0; i < 8; ++i) ramp.push_back(i / 7.0);
  CHECK(stats::dip_statistic(ramp) == Approx(0.0625).epsilon(1e-12));

  CHECK(stats::dip_statistic(kBimodal10) ==
        Approx(0.22282608695652178).epsilon(1e-12));
  CHECK(stats::dip_statistic(kMixed10) == Approx(0.135).epsilon(1e-12));
  CHECK(stats::dip_statistic(kTied12) ==
        Approx(0.16071428571428573).epsilon(1e-12));
}

TEST_CASE("dip statistic handles degenerate samples", "[dip]") {
  CHECK(stats::dip_statistic({5.0, 5.0, 5.0}) == 0.0);
  CHECK(stats::dip_statistic({2.0, 2.0}) == 0.0);
  CHECK_THROWS_AS(stats::dip_statistic({1.0}), ContractError);
  CHECK_THROWS_AS(stats::dip_statistic({}), ContractError);
  // input order is irrelevant
  CHECK(stats::dip_statistic({1.0, 0.0, 3.0, 2.0}) ==
        Approx(0.125).epsilon(1e-14));
}

TEST_CASE("dip statistic is affine-invariant and reflection-symmetric",
          "[dip]") {
  std::mt19937_64 rng(71001);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    size_t n = 5 + rng() % 60;
    std::vector<double> x(n);
    for (auto& v : x) v = unif(rng);
    if (trial % 3 == 0)
      for (size_t i = 0; i < n / 2; ++i) x[i] += 2.0;  // push bimodality

    double d = stats::dip_statistic(x);
    CHECK(d >= 0.0);
    CHECK(d <= 0.25 + 1e-12);

    std::vector<double> scaled(x), flipped(x);
    for (auto& v : scaled) v = 3.7 * v - 12.0;
    for (auto& v : flipped) v = -v;
    CHECK(stats::dip_statistic(scaled) == Approx(d).margin(1e-12));
    CHECK(stats::dip_statistic(flipped) == Approx(d).margin(1e-12));
  }
}

TEST_CASE("dip test contract and determinism", "[dip]") {
  CHECK_THROWS_AS(stats::hartigan_dip({1.0, 2.0, 3.0}, 1000, 1),
                  ContractError);
  CHECK_THROWS_AS(stats::hartigan_dip({1, 2, 3, 4}, 999, 1), ContractError);

  auto a = stats::hartigan_dip(kBimodal10, 1000, 42);
  auto b = stats::hartigan_dip(kBimodal10, 1000, 42);
  CHECK(a.p_value == b.p_value);
  CHECK(a.statistic == Approx(0.22282608695652178).epsilon(1e-12));
  CHECK(a.p_value > 0.0);
  CHECK(a.p_value <= 1.0);
  CHECK(a.params["n_boot"] == 1000);
  CHECK(a.params["seed"] == 42);
  CHECK(a.n == std::vector<size_t>{10});
}

TEST_CASE("dip test keeps the null and rejects strong mixtures", "[dip]") {
  std::mt19937_64 rng(71002);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> lobe(0.0, 0.5);

  int null_ok = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    std::vector<double> x(500);
    for (auto& v : x) v = unif(rng);
    if (stats::hartigan_dip(x, 1000, static_cast<uint64_t>(seed)).p_value >
        0.05)
      ++null_ok;
  }
  CHECK(null_ok >= 18);

  int power_ok = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    std::vector<double> x(500);
    for (size_t i = 0; i < x.size(); ++i)
      x[i] = lobe(rng) + (i % 2 == 0 ? -2.0 : 2.0);
    if (stats::hartigan_dip(x, 1000, static_cast<uint64_t>(seed)).p_value <
        0.01)
      ++power_ok;
  }
  CHECK(power_ok == 10);
}

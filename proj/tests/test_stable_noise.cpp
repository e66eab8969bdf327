#include <algorithm>
#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "ota/analysis.hpp"
#include "ota/stable_noise.hpp"

using namespace ota;

namespace {

std::vector<double> draws(const StableParams& p, std::size_t n, std::uint64_t seed) {
  return sample_stable_batch(p, n, seed);
}

double tail_slope(const std::vector<double>& x) {
  const std::vector<double> thresholds{10, 20, 40, 80};
  std::vector<double> probs;
  for (double t : thresholds) probs.push_back(tail_exceedance(x, t));
  return fit_power_law(thresholds, probs).slope;
}

}  // namespace

TEST_CASE("StableParams validation") {
  CHECK_NOTHROW(StableParams(1.5, 1.0));
  CHECK_THROWS_AS(StableParams(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(2.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(StableParams(1.5, -1.0), std::invalid_argument);
}

TEST_CASE("alpha = 2 is Gaussian with variance 2 delta^2") {
  const auto x = draws({2.0, 1.0}, 1000000, 1);
  double s = 0, s2 = 0;
  for (double v : x) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(x.size());
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("near-Cauchy draws are centred") {
  auto x = draws({1.001, 1.0}, 1000000, 2);
  std::nth_element(x.begin(), x.begin() + 500000, x.end());
  CHECK(std::abs(x[500000]) < 0.01);
}

TEST_CASE("characteristic function matches exp(-delta^a |w|^a)") {
  {
    const StableParams p{1.5, 1.0};
    const auto x = draws(p, 1000000, 3);
    CHECK(std::abs(empirical_char_fn(x, 1.0).real() - std::exp(-1.0)) < 0.005);
  }
  {
    // 2^1.5 * 0.5^1.5 = 1, so the target is exp(-1).
    const StableParams p{1.5, 2.0};
    const auto x = draws(p, 1000000, 4);
    const auto cf = empirical_char_fn(x, 0.5);
    CHECK(std::abs(cf.real() - 0.36787944117144232) < 0.005);
    CHECK(std::abs(cf.imag()) < 0.005);
    CHECK(stable_char_fn(p, 0.5) == doctest::Approx(0.36787944117144232).epsilon(1e-14));
  }
}

TEST_CASE("sample_stable_vec") {
  RngStream rng(5, 0);
  CHECK(sample_stable_vec({1.3, 0.5}, 3, rng).size() == 3);

  RngStream a(6, 9);
  RngStream b(6, 9);
  for (int i = 0; i < 100; ++i) CHECK(sample_stable_vec({1.5, 1.0}, 1, a)[0] == sample_stable({1.5, 1.0}, b));

  RngStream c(7, 0);
  const int n = 1000000;
  double s01 = 0, s00 = 0, s11 = 0;
  for (int i = 0; i < n; ++i) {
    const auto v = sample_stable_vec({2.0, 1.0}, 2, c);
    s01 += v[0] * v[1];
    s00 += v[0] * v[0];
    s11 += v[1] * v[1];
  }
  CHECK(std::abs(s01 / std::sqrt(s00 * s11)) < 0.01);
}

TEST_CASE("empirical_char_fn edge cases") {
  const std::vector<double> zeros{0, 0, 0};
  const auto cf = empirical_char_fn(zeros, 5.0);
  CHECK(cf.real() == 1.0);
  CHECK(cf.imag() == 0.0);
  const std::vector<double> pair{-3.7, 3.7};
  CHECK(empirical_char_fn(pair, 1.3).imag() == 0.0);
  CHECK_THROWS_AS(empirical_char_fn(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("tail_exceedance") {
  CHECK(tail_exceedance(std::vector<double>(10, 0.0), 1.0) == 0.0);
  CHECK(tail_exceedance(std::vector<double>{-3, 1, 2, 5}, 2.5) == 0.5);
  CHECK_THROWS_AS(tail_exceedance(std::vector<double>{1}, 0.0), std::invalid_argument);

  const auto heavy = draws({1.5, 1.0}, 10000000, 8);
  CHECK(tail_slope(heavy) == doctest::Approx(-1.5).epsilon(0.1 / 1.5));

  const auto gauss = draws({2.0, 1.0}, 10000000, 9);
  CHECK(tail_exceedance(gauss, 10.0) < 1e-6);
}

TEST_CASE("property: scaling and stability under sums") {
  const StableParams p{1.5, 1.0};
  const auto x = draws(p, 1000000, 10);
  std::vector<double> scaled(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = 3.0 * x[i];
  for (double w : {0.1, 0.25, 0.5, 1.0}) {
    CHECK(std::abs(empirical_char_fn(scaled, w).real() - stable_char_fn({1.5, 3.0}, w)) < 0.01);
  }

  // Sum of 4 i.i.d. S(a, d) is S(a, 4^{1/a} d).
  const auto y = draws(p, 4000000, 11);
  std::vector<double> sums(1000000, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) sums[i / 4] += y[i];
  const StableParams summed{1.5, std::pow(4.0, 1.0 / 1.5)};
  for (double w : {0.1, 0.25, 0.5, 1.0}) {
    CHECK(std::abs(empirical_char_fn(sums, w).real() - stable_char_fn(summed, w)) < 0.01);
  }
}

TEST_CASE("property: symmetry of signs") {
  const auto x = draws({1.2, 1.0}, 1000000, 12);
  double s = 0;
  for (double v : x) s += (v > 0) - (v < 0);
  CHECK(std::abs(s / 1e6) < 3.0 / std::sqrt(1e6));
}

TEST_CASE("determinism and parallel/serial agreement of the bulk kernel") {
  const StableParams p{1.7, 0.5};
  const std::size_t n = 5 * kStableChunk + 123;
  const auto a = sample_stable_batch(p, n, 99);
  const auto b = sample_stable_batch(p, n, 99);
  const auto c = sample_stable_batch_serial(p, n, 99);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(sample_stable_batch(p, n, 100) != a);
  for (double v : a) REQUIRE(std::isfinite(v));
}

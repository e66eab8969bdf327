#include <cmath>
#include <numbers>

#include <stdexcept>

#include "doctest.h"
#include "ota/alpha_core.hpp"
#include "ota/rng.hpp"

using namespace ota;

namespace {

Vec random_vec(RngStream& rng, std::size_t d, double lo, double hi) {
  Vec v(d);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

}  // namespace

TEST_CASE("AlphaIndex accepts (1, 2] only") {
  CHECK(AlphaIndex(1.5).value() == 1.5);
  CHECK(AlphaIndex(2.0).value() == 2.0);
  CHECK_THROWS_AS(AlphaIndex(1.0), std::invalid_argument);
  CHECK_THROWS_AS(AlphaIndex(0.8), std::invalid_argument);
  CHECK_THROWS_AS(AlphaIndex(2.01), std::invalid_argument);
  CHECK_THROWS_AS(AlphaIndex(std::nan("")), std::invalid_argument);
}

TEST_CASE("signed_power examples") {
  CHECK(signed_power(Vec{-2, 3}, 2.0) == Vec{-4, 9});
  CHECK(signed_power(Vec{-5, 0, 7}, 1.0) == Vec{-5, 0, 7});
  const auto v = signed_power(Vec{-4, 0, 1}, 1.5);
  CHECK(v[0] == doctest::Approx(-8.0).epsilon(1e-15));
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 1.0);
  CHECK(signed_power(Vec{0.0, -0.0}, 0.3) == Vec{0.0, 0.0});
  CHECK_THROWS_AS(signed_power(Vec{1.0, INFINITY}, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(signed_power(Vec{1.0, NAN}, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(signed_power(Vec{1.0}, -0.5), std::invalid_argument);
}

TEST_CASE("alpha_norm_pow examples") {
  CHECK(alpha_norm_pow(Vec{1, 1}, 1.5) == 2.0);
  CHECK(alpha_norm_pow(Vec{0, 0, 0}, 1.7) == 0.0);
  // 2^1.5 + 3^1.5 (mpmath, 30 digits)
  CHECK(alpha_norm_pow(Vec{-2, 3}, 1.5) == doctest::Approx(8.02457954745282197818).epsilon(1e-14));
  CHECK_THROWS_AS(alpha_norm_pow(Vec{1}, 0.5), std::invalid_argument);
}

TEST_CASE("lemma1_gap examples") {
  CHECK(lemma1_gap(Vec{1, 0}, Vec{0, 1}, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
  RngStream rng(11, 0);
  for (double a : {1.0, 1.3, 1.5, 2.0}) {
    const Vec w = random_vec(rng, 4, -10, 10);
    CHECK(lemma1_gap(w, Vec(4, 0.0), a) == doctest::Approx(0.0).scale(alpha_norm_pow(w, a)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(lemma1_gap(Vec{1, 2}, Vec{1}, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(lemma1_gap(Vec{1}, Vec{1}, 2.5), std::invalid_argument);
}

TEST_CASE("property: oddness, pairing identity, composition, Euclidean reduction") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto d = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    const Vec w = random_vec(rng, d, -10, 10);
    const double a = 1.0 + rng.uniform();

    Vec neg(w);
    for (auto& x : neg) x = -x;
    const auto p = signed_power(w, a);
    const auto q = signed_power(neg, a);
    for (std::size_t i = 0; i < d; ++i) CHECK(q[i] == -p[i]);

    const double pairing = dot(signed_power(w, a - 1.0), w);
    const double norm = alpha_norm_pow(w, a);
    CHECK(std::abs(pairing - norm) <= 1e-12 * norm);

    const double b = 0.5 + rng.uniform();
    const auto composed = signed_power(signed_power(w, a), b);
    const auto direct = signed_power(w, a * b);
    for (std::size_t i = 0; i < d; ++i) CHECK(composed[i] == doctest::Approx(direct[i]).epsilon(1e-12));

    double euclid = 0.0;
    for (double x : w) euclid += x * x;
    CHECK(alpha_norm_pow(w, 2.0) == euclid);
  }
}

TEST_CASE("property: Lemma 1 inequality holds on random triples") {
  RngStream rng(13, 0);
  double worst = INFINITY;
  for (int trial = 0; trial < 100000; ++trial) {
    const auto d = 1 + static_cast<std::size_t>(rng.uniform() * 6);
    const Vec w = random_vec(rng, d, -10, 10);
    const Vec v = random_vec(rng, d, -10, 10);
    const double a = 1.0 + rng.uniform();
    worst = std::min(worst, lemma1_gap(w, v, a));
  }
  CHECK(worst >= -1e-12);
}

TEST_CASE("is_alpha_pd") {
  CHECK(is_alpha_pd(Matrix::identity(3), 1.5, 10000));
  CHECK_FALSE(is_alpha_pd(Matrix::identity(3, -1.0), 1.5, 10000));
  const double diag[] = {2.0, 0.5};
  CHECK(is_alpha_pd(Matrix::diagonal(diag), 1.3, 100000));

  Matrix asym(2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(is_alpha_pd(asym, 1.5, 10), std::invalid_argument);
  CHECK_THROWS_AS(is_alpha_pd(Matrix::identity(2), 1.5, 0), std::invalid_argument);

  // Indefinite matrix: the sampler must find a negative direction.
  Matrix indef = Matrix::identity(2);
  indef(1, 1) = -1.0;
  CHECK_FALSE(is_alpha_pd(indef, 1.5, 1000));
}

TEST_CASE("diag(2, 0.5) is alpha-pd on an exhaustive direction grid") {
  // Independent of the sampler: sweep the unit alpha-circle directly.
  const double a = 1.3;
  double worst = INFINITY;
  for (int i = 0; i < 100000; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 100000.0;
    const double v1 = std::cos(t);
    const double v2 = std::sin(t);
    const double form = 2.0 * v1 * std::copysign(std::pow(std::abs(v1), a - 1.0), v1) +
                        0.5 * v2 * std::copysign(std::pow(std::abs(v2), a - 1.0), v2);
    worst = std::min(worst, form);
  }
  CHECK(worst > 0.0);
}

#include "ota/alpha_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ota/rng.hpp"

namespace ota {

AlphaIndex::AlphaIndex(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("tail index alpha must lie in (1, 2], got " + std::to_string(alpha));
  }
}

Matrix Matrix::identity(std::size_t d, double scale) {
  Matrix m(d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = scale;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

bool Matrix::is_symmetric(double tol) const {
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = r + 1; c < dim; ++c) {
      if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
    }
  }
  return true;
}

Vec Matrix::apply(std::span<const double> v) const {
  if (v.size() != dim) throw std::invalid_argument("matrix/vector dimension mismatch");
  Vec out(dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < dim; ++c) acc += (*this)(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

void require_finite(std::span<const double> w, const char* what) {
  for (double x : w) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

Vec signed_power(std::span<const double> w, double alpha) {
  require_finite(w, "signed_power");
  if (!(alpha >= 0.0)) throw std::invalid_argument("signed_power: alpha must be >= 0");
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w[i];
    if (x == 0.0) {
      out[i] = 0.0;
    } else if (alpha == 1.0) {
      out[i] = x;
    } else {
      out[i] = std::copysign(std::pow(std::abs(x), alpha), x);
    }
  }
  return out;
}

double alpha_norm_pow(std::span<const double> w, double alpha) {
  require_finite(w, "alpha_norm_pow");
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha_norm_pow: alpha must be >= 1");
  double acc = 0.0;
  if (alpha == 2.0) {
    for (double x : w) acc += x * x;
  } else {
    for (double x : w) acc += std::pow(std::abs(x), alpha);
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double lemma1_gap(std::span<const double> w, std::span<const double> v, double alpha) {
  if (w.size() != v.size()) throw std::invalid_argument("lemma1_gap: dimension mismatch");
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw std::invalid_argument("lemma1_gap: alpha must lie in [1, 2]");
  Vec sum(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sum[i] = w[i] + v[i];
  const double lhs = alpha_norm_pow(sum, alpha);
  const double rhs = alpha_norm_pow(w, alpha) + alpha * dot(signed_power(w, alpha - 1.0), v) +
                     4.0 * alpha_norm_pow(v, alpha);
  return rhs - lhs;
}

bool is_alpha_pd(const Matrix& q, double alpha, std::size_t samples, std::uint64_t seed) {
  if (!q.is_symmetric(1e-12)) throw std::invalid_argument("is_alpha_pd: matrix is not symmetric");
  if (samples == 0) throw std::invalid_argument("is_alpha_pd: need at least one sample");
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw std::invalid_argument("is_alpha_pd: alpha must lie in [1, 2]");
  const std::size_t d = q.dim;
  RngStream rng(seed, 0);
  Vec v(d);
  for (std::size_t s = 0; s < samples; ++s) {
    double norm = 0.0;
    do {
      for (auto& x : v) x = rng.normal();
      norm = std::pow(alpha_norm_pow(v, alpha), 1.0 / alpha);
    } while (norm == 0.0);
    // (1, 2] radius; the sign of the form is scale invariant but we honour the domain.
    const double radius = 2.0 - rng.uniform();
    for (auto& x : v) x *= radius / norm;
    if (!(dot(v, q.apply(signed_power(v, alpha - 1.0))) > 0.0)) return false;
  }
  return true;
}

}  // namespace ota

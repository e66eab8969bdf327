#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ota {

using Vec = std::vector<double>;

/// Tail index restricted to (1, 2]. The value 2 is the Gaussian boundary.
class AlphaIndex {
public:
  explicit AlphaIndex(double alpha);
  double value() const noexcept { return alpha_; }
  operator double() const noexcept { return alpha_; }

private:
  double alpha_;
};

/// Dense row-major square matrix, just enough for the curvature checks.
struct Matrix {
  std::size_t dim = 0;
  std::vector<double> data;

  Matrix() = default;
  explicit Matrix(std::size_t d, double fill = 0.0) : dim(d), data(d * d, fill) {}

  static Matrix identity(std::size_t d, double scale = 1.0);
  static Matrix diagonal(std::span<const double> diag);

  double& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }

  bool is_symmetric(double tol = 0.0) const;
  Vec apply(std::span<const double> v) const;
};

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(std::span<const double> w, const char* what);

/// Entrywise sign(w_i)|w_i|^alpha with sign(0) = 0.
Vec signed_power(std::span<const double> w, double alpha);

/// sum_i |w_i|^alpha, i.e. the alpha-norm raised to the power alpha.
double alpha_norm_pow(std::span<const double> w, double alpha);

double dot(std::span<const double> a, std::span<const double> b);

/// RHS - LHS of the Taylor-type bound
///   ||w+v||^a <= ||w||^a + a <w^{<a-1>}, v> + 4 ||v||^a,   a in [1, 2].
/// Non-negative whenever the bound holds.
double lemma1_gap(std::span<const double> w, std::span<const double> v, double alpha);

/// Monte-Carlo alpha-positive-definiteness certificate.
///
/// Draws `samples` vectors with ||v||_alpha in (1, 2] and uniformly random
/// directions, and reports whether <v, Q v^{<alpha-1>}> > 0 held for every
/// one of them. A `true` result is probabilistic evidence, not a proof; a
/// `false` result comes with a concrete counterexample and is definitive.
bool is_alpha_pd(const Matrix& q, double alpha, std::size_t samples, std::uint64_t seed = 0x5eed);

}  // namespace ota

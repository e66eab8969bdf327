#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ota/alpha_core.hpp"
#include "ota/rng.hpp"

namespace ota {

/// Symmetric alpha-stable law with characteristic function exp(-delta^alpha |omega|^alpha).
struct StableParams {
  double alpha = 1.5;
  double delta = 1.0;

  StableParams() = default;
  StableParams(double alpha_, double delta_);
};

/// One exact draw (Chambers-Mallows-Stuck transform; explicit Gaussian branch at alpha = 2,
/// where the draw has standard deviation delta * sqrt(2)).
double sample_stable(const StableParams& params, RngStream& rng);

/// d i.i.d. draws from the same stream. d = 1 reproduces sample_stable exactly.
Vec sample_stable_vec(const StableParams& params, std::size_t d, RngStream& rng);
void fill_stable(const StableParams& params, std::span<double> out, RngStream& rng);

/// Bulk sampling kernels. Draw i comes from the stream of chunk i / kStableChunk,
/// so the output is a pure function of (params, n, seed) whatever the thread count.
inline constexpr std::size_t kStableChunk = 8192;
std::vector<double> sample_stable_batch(const StableParams& params, std::size_t n, std::uint64_t seed);
std::vector<double> sample_stable_batch_serial(const StableParams& params, std::size_t n,
                                               std::uint64_t seed);

/// (1/n) sum exp(j omega x_i).
std::complex<double> empirical_char_fn(std::span<const double> samples, double omega);

/// exp(-delta^alpha |omega|^alpha).
double stable_char_fn(const StableParams& params, double omega);

/// Fraction of samples with |x| > threshold.
double tail_exceedance(std::span<const double> samples, double threshold);

}  // namespace ota

#include "ota/stable_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ota {

StableParams::StableParams(double alpha_, double delta_) : alpha(AlphaIndex(alpha_).value()), delta(delta_) {
  if (!(delta_ > 0.0) || !std::isfinite(delta_)) {
    throw std::invalid_argument("stable scale delta must be positive and finite, got " + std::to_string(delta_));
  }
}

double sample_stable(const StableParams& params, RngStream& rng) {
  const double a = params.alpha;
  if (a == 2.0) return params.delta * std::numbers::sqrt2 * rng.normal();

  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double av = a * v;
  const double x = std::sin(av) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - av) / w, (1.0 - a) / a);
  return params.delta * x;
}

void fill_stable(const StableParams& params, std::span<double> out, RngStream& rng) {
  for (auto& x : out) x = sample_stable(params, rng);
}

Vec sample_stable_vec(const StableParams& params, std::size_t d, RngStream& rng) {
  Vec out(d);
  fill_stable(params, out, rng);
  return out;
}

namespace {

void fill_chunk(const StableParams& params, std::span<double> out, std::uint64_t seed, std::size_t chunk) {
  RngStream rng(seed, derive_stream_id({0x57ab1eULL, chunk}));
  const std::size_t begin = chunk * kStableChunk;
  const std::size_t end = std::min(out.size(), begin + kStableChunk);
  fill_stable(params, out.subspan(begin, end - begin), rng);
}

}  // namespace

std::vector<double> sample_stable_batch(const StableParams& params, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  const auto chunks = static_cast<std::int64_t>((n + kStableChunk - 1) / kStableChunk);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) fill_chunk(params, out, seed, static_cast<std::size_t>(c));
  return out;
}

std::vector<double> sample_stable_batch_serial(const StableParams& params, std::size_t n,
                                               std::uint64_t seed) {
  std::vector<double> out(n);
  const std::size_t chunks = (n + kStableChunk - 1) / kStableChunk;
  for (std::size_t c = 0; c < chunks; ++c) fill_chunk(params, out, seed, c);
  return out;
}

std::complex<double> empirical_char_fn(std::span<const double> samples, double omega) {
  if (samples.empty()) throw std::invalid_argument("empirical_char_fn: empty sample");
  double re = 0.0;
  double im = 0.0;
  for (double x : samples) {
    re += std::cos(omega * x);
    im += std::sin(omega * x);
  }
  const auto n = static_cast<double>(samples.size());
  return {re / n, im / n};
}

double stable_char_fn(const StableParams& params, double omega) {
  return std::exp(-std::pow(params.delta * std::abs(omega), params.alpha));
}

double tail_exceedance(std::span<const double> samples, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("tail_exceedance: threshold must be positive");
  if (samples.empty()) return 0.0;
  std::size_t hits = 0;
  for (double x : samples) hits += std::abs(x) > threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace ota

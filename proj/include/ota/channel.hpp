#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ota/alpha_core.hpp"
#include "ota/rng.hpp"
#include "ota/stable_noise.hpp"

namespace ota {

enum class FadingModel {
  /// Rayleigh amplitude scaled so its mean is fading_mean; the spread is implied.
  rayleigh,
  /// Normal(fading_mean, fading_std^2) conditioned on being positive. With
  /// fading_std = 0 the gain is deterministic.
  truncated_gaussian,
};

enum class AggregationMode { waveform, direct };

std::string to_string(FadingModel m);
std::string to_string(AggregationMode m);

struct ChannelModel {
  FadingModel fading = FadingModel::rayleigh;
  double fading_mean = 1.0;
  /// Only read for truncated_gaussian; for Rayleigh see fading_sigma().
  double fading_std = 0.0;
  /// Disengaged means the interference term is switched off.
  std::optional<StableParams> interference = StableParams{};
  std::size_t num_agents = 1;
  std::size_t waveform_samples = 0;
  std::uint64_t basis_seed = 0xba515ULL;

  void validate(std::size_t dim) const;
  /// Standard deviation of the fading gain actually simulated.
  double fading_sigma() const;
};

double sample_fading(const ChannelModel& model, RngStream& rng);

/// d discretised orthonormal waveforms of length T, stored row-major (d x T).
class WaveformBasis {
public:
  WaveformBasis(std::size_t dim, std::size_t samples, std::vector<double> rows);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t samples() const noexcept { return samples_; }
  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * samples_, samples_}; }

  /// Largest |<s_i, s_j> - [i == j]| over all row pairs.
  double orthonormality_error() const;

private:
  std::size_t dim_;
  std::size_t samples_;
  std::vector<double> rows_;
};

/// First d rows of a T x T orthogonal matrix obtained by Householder QR of a
/// seeded Gaussian matrix.
WaveformBasis make_basis(std::size_t dim, std::size_t samples, std::uint64_t seed = 0xba515ULL);

/// x(t) = sum_i gradient_i s_i(t).
std::vector<double> modulate(std::span<const double> gradient, const WaveformBasis& basis);
/// Matched-filter bank: entry i is <signal, s_i>.
Vec demodulate(std::span<const double> signal, const WaveformBasis& basis);

/// Deterministic core of the uplink: (1/N) sum_n h_n grad_n + xi, either by
/// direct vector arithmetic or by modulating, superposing in signal space,
/// adding the interference waveform and matched filtering. `interference` may
/// be empty, meaning zero.
Vec combine_uplink(std::span<const Vec> gradients, std::span<const double> fading,
                   std::span<const double> interference, AggregationMode mode,
                   const WaveformBasis* basis = nullptr);

/// Noisy aggregated gradient received by the server in one round. Fading gains
/// come from `fading_rng`, the interference vector from `interference_rng`.
/// Waveform mode needs a basis; one is built from model.basis_seed when none is passed.
Vec ota_aggregate(std::span<const Vec> gradients, const ChannelModel& model, RngStream& fading_rng,
                  RngStream& interference_rng, AggregationMode mode = AggregationMode::direct,
                  const WaveformBasis* basis = nullptr);

/// Single-stream convenience overload: fading draws first, then interference.
Vec ota_aggregate(std::span<const Vec> gradients, const ChannelModel& model, RngStream& rng,
                  AggregationMode mode = AggregationMode::direct, const WaveformBasis* basis = nullptr);

}  // namespace ota

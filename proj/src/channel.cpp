#include "ota/channel.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ota {

std::string to_string(FadingModel m) {
  return m == FadingModel::rayleigh ? "rayleigh" : "truncated_gaussian";
}

std::string to_string(AggregationMode m) { return m == AggregationMode::waveform ? "waveform" : "direct"; }

void ChannelModel::validate(std::size_t dim) const {
  if (!(fading_mean > 0.0)) throw std::invalid_argument("channel: fading mean must be positive");
  if (!(fading_std >= 0.0)) throw std::invalid_argument("channel: fading std must be non-negative");
  if (num_agents < 1) throw std::invalid_argument("channel: need at least one agent");
  if (waveform_samples != 0 && waveform_samples < dim) {
    throw std::invalid_argument("channel: waveform length T must be at least the gradient dimension");
  }
}

double ChannelModel::fading_sigma() const {
  if (fading == FadingModel::rayleigh) return std::sqrt(4.0 / std::numbers::pi - 1.0) * fading_mean;
  return fading_std;
}

double sample_fading(const ChannelModel& model, RngStream& rng) {
  if (model.fading == FadingModel::rayleigh) {
    // Rayleigh mean is scale * sqrt(pi / 2).
    const double scale = model.fading_mean / std::sqrt(std::numbers::pi / 2.0);
    return scale * std::sqrt(2.0 * rng.exponential());
  }
  if (model.fading_std == 0.0) return model.fading_mean;
  for (;;) {
    const double h = model.fading_mean + model.fading_std * rng.normal();
    if (h > 0.0) return h;
  }
}

WaveformBasis::WaveformBasis(std::size_t dim, std::size_t samples, std::vector<double> rows)
    : dim_(dim), samples_(samples), rows_(std::move(rows)) {
  if (rows_.size() != dim_ * samples_) throw std::invalid_argument("WaveformBasis: storage size mismatch");
}

double WaveformBasis::orthonormality_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i; j < dim_; ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(dot(row(i), row(j)) - target));
    }
  }
  return worst;
}

WaveformBasis make_basis(std::size_t dim, std::size_t samples, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("make_basis: dimension must be positive");
  if (samples < dim) throw std::invalid_argument("make_basis: need T >= d");
  const auto t = static_cast<Eigen::Index>(samples);
  Eigen::MatrixXd a(t, t);
  RngStream rng(seed, derive_stream_id({0xba515ULL, dim, samples}));
  for (Eigen::Index c = 0; c < t; ++c)
    for (Eigen::Index r = 0; r < t; ++r) a(r, c) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  std::vector<double> rows(dim * samples);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t s = 0; s < samples; ++s)
      rows[i * samples + s] = q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
  return WaveformBasis(dim, samples, std::move(rows));
}

std::vector<double> modulate(std::span<const double> gradient, const WaveformBasis& basis) {
  if (gradient.size() != basis.dim()) throw std::invalid_argument("modulate: gradient/basis dimension mismatch");
  std::vector<double> signal(basis.samples(), 0.0);
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto s = basis.row(i);
    for (std::size_t t = 0; t < signal.size(); ++t) signal[t] += gradient[i] * s[t];
  }
  return signal;
}

Vec demodulate(std::span<const double> signal, const WaveformBasis& basis) {
  if (signal.size() != basis.samples()) throw std::invalid_argument("demodulate: signal length mismatch");
  Vec out(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) out[i] = dot(signal, basis.row(i));
  return out;
}

Vec combine_uplink(std::span<const Vec> gradients, std::span<const double> fading,
                   std::span<const double> interference, AggregationMode mode, const WaveformBasis* basis) {
  if (gradients.empty()) throw std::invalid_argument("combine_uplink: no gradients");
  if (fading.size() != gradients.size()) throw std::invalid_argument("combine_uplink: one fading gain per agent");
  const std::size_t d = gradients.front().size();
  for (const auto& g : gradients) {
    if (g.size() != d) throw std::invalid_argument("combine_uplink: gradient dimension mismatch");
  }
  if (!interference.empty() && interference.size() != d) {
    throw std::invalid_argument("combine_uplink: interference dimension mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(gradients.size());

  if (mode == AggregationMode::direct) {
    Vec out(d, 0.0);
    for (std::size_t n = 0; n < gradients.size(); ++n) {
      const double h = fading[n];
      for (std::size_t i = 0; i < d; ++i) out[i] += h * gradients[n][i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      out[i] *= inv_n;
      if (!interference.empty()) out[i] += interference[i];
    }
    return out;
  }

  if (basis == nullptr || basis->dim() != d) throw std::invalid_argument("combine_uplink: waveform mode needs a d-row basis");
  std::vector<double> received(basis->samples(), 0.0);
  for (std::size_t n = 0; n < gradients.size(); ++n) {
    const auto x = modulate(gradients[n], *basis);
    const double gain = fading[n] * inv_n;
    for (std::size_t t = 0; t < received.size(); ++t) received[t] += gain * x[t];
  }
  if (!interference.empty()) {
    const auto xi = modulate(interference, *basis);
    for (std::size_t t = 0; t < received.size(); ++t) received[t] += xi[t];
  }
  return demodulate(received, *basis);
}

Vec ota_aggregate(std::span<const Vec> gradients, const ChannelModel& model, RngStream& fading_rng,
                  RngStream& interference_rng, AggregationMode mode, const WaveformBasis* basis) {
  if (gradients.size() != model.num_agents) {
    throw std::invalid_argument("ota_aggregate: expected one gradient per agent");
  }
  const std::size_t d = gradients.empty() ? 0 : gradients.front().size();
  std::vector<double> fading(gradients.size());
  for (auto& h : fading) h = sample_fading(model, fading_rng);
  Vec xi;
  if (model.interference) xi = sample_stable_vec(*model.interference, d, interference_rng);

  if (mode == AggregationMode::waveform && basis == nullptr) {
    const std::size_t t = model.waveform_samples == 0 ? d : model.waveform_samples;
    const auto local = make_basis(d, t, model.basis_seed);
    return combine_uplink(gradients, fading, xi, mode, &local);
  }
  return combine_uplink(gradients, fading, xi, mode, basis);
}

Vec ota_aggregate(std::span<const Vec> gradients, const ChannelModel& model, RngStream& rng,
                  AggregationMode mode, const WaveformBasis* basis) {
  return ota_aggregate(gradients, model, rng, rng, mode, basis);
}

}  // namespace ota

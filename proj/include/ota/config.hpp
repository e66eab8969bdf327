#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ota/channel.hpp"
#include "ota/objectives.hpp"
#include "ota/trainer.hpp"

namespace ota {

/// Parse or validation failure; the message names the line and/or field.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ChannelSettings {
  FadingModel fading = FadingModel::rayleigh;
  double fading_mean = 1.0;
  double fading_std = 0.0;
  bool interference = true;
  double alpha = 1.5;
  double delta = 1.0;
  AggregationMode mode = AggregationMode::direct;
  std::size_t waveform_samples = 0;
  std::uint64_t basis_seed = 0xba515ULL;
};

struct TrainingSettings {
  Schedule::Kind schedule = Schedule::Kind::theta_over_k;
  double theta = 1.0;
  double rho = 0.5;
  double eta = 0.1;
  bool momentum = false;
  double beta = 0.0;
  std::size_t rounds = 10000;
  std::size_t trials = 50;
  /// "unit_offset" (w* + e_1) or "origin".
  std::string init = "unit_offset";
  std::uint64_t seed = 1;
};

struct AnalysisSettings {
  /// 0 selects the default window (last two decades).
  std::size_t fit_k_min = 0;
  std::size_t fit_k_max = 0;
  /// Geometric grid density for the rate fit; 0 fits every round.
  std::size_t fit_points_per_decade = 20;
  double L = 1.0;
  /// Disengaged: calibrate from c_samples draws (capped at the 99.9% quantile).
  std::optional<double> C;
  std::size_t c_samples = 100000;
  /// Disengaged: problem.gradient_bound(region_radius).
  std::optional<double> G;
  /// Disengaged: ||w_0 - w*||.
  std::optional<double> region_radius;
  std::vector<std::size_t> bound_k{10, 100, 1000, 10000};
  double B = 1.0;
  double gen_lambda = 1.0;
  std::size_t dataset_size = 60000;
  double p = 0.05;
};

struct OutputSettings {
  std::string directory = "out";
  bool csv = true;
  bool summary = true;
};

struct ExperimentConfig {
  ProblemSpec problem;
  ChannelSettings channel;
  TrainingSettings training;
  AnalysisSettings analysis;
  OutputSettings output;

  ChannelModel channel_model() const;
  TrainConfig train_config(const FederatedProblem& problem) const;
  /// Re-checks every invariant; throws ConfigError naming the field.
  void validate() const;
};

/// Parses the sectioned `key = value` format. Unknown sections or keys,
/// duplicates and malformed values are rejected with their line number.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

/// Sets one field by its dotted name, e.g. "channel.alpha", validating the value.
void set_config_value(ExperimentConfig& config, const std::string& dotted_key, const std::string& value);

}  // namespace ota

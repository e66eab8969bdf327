#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ota/alpha_core.hpp"
#include "ota/channel.hpp"
#include "ota/objectives.hpp"

namespace ota {

struct Schedule {
  enum class Kind { theta_over_k, power, constant };
  Kind kind = Kind::theta_over_k;
  /// theta for theta_over_k, rho for power, eta for constant.
  double value = 1.0;

  static Schedule theta_over_k(double theta) { return {Kind::theta_over_k, theta}; }
  static Schedule power(double rho) { return {Kind::power, rho}; }
  static Schedule constant(double eta) { return {Kind::constant, eta}; }

  void validate() const;
};

std::string to_string(Schedule::Kind kind);

/// Learning rate of round k (k >= 1): theta / k, k^-rho, or eta.
double lr(const Schedule& schedule, std::size_t k);

struct TrainConfig {
  Schedule schedule;
  /// Disengaged: plain analog GD. Engaged: heavy-ball momentum with this weight,
  /// including the degenerate weight 0.
  std::optional<double> momentum_beta;
  std::size_t rounds = 100;
  std::size_t trials = 1;
  /// Empty: w* + e_1, so the initial error is 1 in every alpha-norm.
  Vec initial_point;
  std::uint64_t seed = 1;
  AggregationMode mode = AggregationMode::direct;
  /// Exponent of the error metric ||w_k - w*||_a^a. Defaults to the
  /// interference tail index, or 2 when interference is off.
  std::optional<double> metric_alpha;

  void validate() const;
};

/// w - eta g.
Vec gd_step(std::span<const double> w, std::span<const double> g, double eta);

/// v' = beta v + g, w' = w - eta v'.
std::pair<Vec, Vec> momentum_step(std::span<const double> w, std::span<const double> v_prev,
                                  std::span<const double> g, double beta, double eta);

Vec default_initial_point(const FederatedProblem& problem);
double metric_alpha(const TrainConfig& config, const ChannelModel& channel);

struct TrialOptions {
  bool record_iterates = false;
  /// Also keeps every aggregated gradient g_k and, under momentum, v_k
  /// (entry k-1 holds round k).
  bool record_aggregates = false;
};

/// Index 0 is the initial point; round k (1..K) uses lr(schedule, k) and the
/// gradient aggregated at w_{k-1}.
struct TrialResult {
  std::vector<double> alpha_err;
  std::vector<double> loss;
  std::size_t rounds_completed = 0;
  /// Set when the iterate, its error or its loss stopped being finite;
  /// entries from that round on are NaN.
  bool diverged = false;
  std::vector<Vec> iterates;
  std::vector<Vec> aggregates;
  std::vector<Vec> velocities;
};

/// Noise for (seed, trial, round) comes from streams derived from that triple,
/// so a trial is reproducible on its own.
TrialResult run_trial(const FederatedProblem& problem, const ChannelModel& channel, const TrainConfig& config,
                      std::uint64_t trial_id, const TrialOptions& options = {});

struct TrajectoryStats {
  std::vector<double> mean_alpha_err;
  std::vector<double> median_alpha_err;
  /// 10% trimmed on both sides.
  std::vector<double> trimmed_mean_alpha_err;
  std::vector<double> mean_loss;
  /// Trials still finite at each round.
  std::vector<std::size_t> n_trials;
  std::vector<double> final_alpha_err;
  std::vector<std::uint64_t> diverged_trials;
  double metric_alpha = 2.0;
  TrainConfig config;

  std::size_t rounds() const noexcept { return mean_alpha_err.empty() ? 0 : mean_alpha_err.size() - 1; }
};

/// Reduces per-trial results in trial-id order. `parallel` splits the work
/// over rounds; each round is still summed in trial order.
TrajectoryStats summarize_trials(std::span<const TrialResult> trials, const TrainConfig& config, double alpha,
                                 bool parallel = false);

/// Trials run in parallel with OpenMP.
TrajectoryStats run_monte_carlo(const FederatedProblem& problem, const ChannelModel& channel,
                                const TrainConfig& config);
/// Single-threaded reference; bit-identical to run_monte_carlo.
TrajectoryStats run_monte_carlo_serial(const FederatedProblem& problem, const ChannelModel& channel,
                                       const TrainConfig& config);

double median(std::vector<double> values);
double trimmed_mean(std::vector<double> values, double fraction);

}  // namespace ota

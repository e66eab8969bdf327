#include "ota/trainer.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ota {

void Schedule::validate() const {
  switch (kind) {
    case Kind::theta_over_k:
      if (!(value > 0.0)) throw std::invalid_argument("schedule: theta must be positive");
      break;
    case Kind::power:
      if (!(value > 0.0 && value < 1.0)) throw std::invalid_argument("schedule: rho must lie in (0, 1)");
      break;
    case Kind::constant:
      if (!(value > 0.0)) throw std::invalid_argument("schedule: constant eta must be positive");
      break;
  }
}

std::string to_string(Schedule::Kind kind) {
  switch (kind) {
    case Schedule::Kind::theta_over_k: return "theta_over_k";
    case Schedule::Kind::power: return "power";
    case Schedule::Kind::constant: return "constant";
  }
  return "?";
}

double lr(const Schedule& schedule, std::size_t k) {
  if (k == 0) throw std::invalid_argument("lr: schedules start at round 1");
  const auto kk = static_cast<double>(k);
  switch (schedule.kind) {
    case Schedule::Kind::theta_over_k: return schedule.value / kk;
    case Schedule::Kind::power: return std::pow(kk, -schedule.value);
    case Schedule::Kind::constant: return schedule.value;
  }
  return 0.0;
}

void TrainConfig::validate() const {
  schedule.validate();
  if (momentum_beta && !(*momentum_beta >= 0.0 && *momentum_beta < 1.0)) {
    throw std::invalid_argument("train: momentum beta must lie in [0, 1)");
  }
  if (trials < 1) throw std::invalid_argument("train: need at least one trial");
  if (metric_alpha && !(*metric_alpha >= 1.0 && *metric_alpha <= 2.0)) {
    throw std::invalid_argument("train: metric alpha must lie in [1, 2]");
  }
}

Vec gd_step(std::span<const double> w, std::span<const double> g, double eta) {
  if (w.size() != g.size()) throw std::invalid_argument("gd_step: dimension mismatch");
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - eta * g[i];
  return out;
}

std::pair<Vec, Vec> momentum_step(std::span<const double> w, std::span<const double> v_prev,
                                  std::span<const double> g, double beta, double eta) {
  if (w.size() != g.size() || v_prev.size() != g.size()) throw std::invalid_argument("momentum_step: dimension mismatch");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("momentum_step: beta must lie in [0, 1)");
  Vec v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = beta * v_prev[i] + g[i];
  return {gd_step(w, v, eta), std::move(v)};
}

Vec default_initial_point(const FederatedProblem& problem) {
  Vec w = problem.minimizer();
  w[0] += 1.0;
  return w;
}

double metric_alpha(const TrainConfig& config, const ChannelModel& channel) {
  if (config.metric_alpha) return *config.metric_alpha;
  return channel.interference ? channel.interference->alpha : 2.0;
}

namespace {

constexpr std::uint64_t kFadingLane = 0;
constexpr std::uint64_t kInterferenceLane = 1;

double alpha_err(std::span<const double> w, std::span<const double> w_star, double alpha, Vec& scratch) {
  for (std::size_t i = 0; i < w.size(); ++i) scratch[i] = w[i] - w_star[i];
  return alpha_norm_pow(scratch, alpha);
}

bool all_finite(std::span<const double> w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrialResult run_trial(const FederatedProblem& problem, const ChannelModel& channel, const TrainConfig& config,
                      std::uint64_t trial_id, const TrialOptions& options) {
  config.validate();
  const std::size_t d = problem.dim();
  channel.validate(d);
  if (channel.num_agents != problem.num_agents()) {
    throw std::invalid_argument("run_trial: channel and problem disagree on the number of agents");
  }
  Vec w = config.initial_point.empty() ? default_initial_point(problem) : config.initial_point;
  if (w.size() != d) throw std::invalid_argument("run_trial: initial point has wrong dimension");

  const double alpha = metric_alpha(config, channel);
  const auto& w_star = problem.minimizer();
  const std::size_t k_max = config.rounds;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::optional<WaveformBasis> basis;
  if (config.mode == AggregationMode::waveform) {
    basis = make_basis(d, channel.waveform_samples == 0 ? d : channel.waveform_samples, channel.basis_seed);
  }

  TrialResult out;
  out.alpha_err.assign(k_max + 1, nan);
  out.loss.assign(k_max + 1, nan);
  Vec scratch(d);
  out.alpha_err[0] = alpha_err(w, w_star, alpha, scratch);
  out.loss[0] = problem.loss(w);
  if (options.record_iterates) out.iterates.push_back(w);

  const bool momentum = config.momentum_beta.has_value();
  const double beta = config.momentum_beta.value_or(0.0);
  Vec v(d, 0.0);
  std::vector<Vec> grads;

  for (std::size_t k = 1; k <= k_max; ++k) {
    problem.local_gradients(w, grads);
    RngStream fading_rng(config.seed, derive_stream_id({trial_id, k, kFadingLane}));
    RngStream interference_rng(config.seed, derive_stream_id({trial_id, k, kInterferenceLane}));
    const Vec g = ota_aggregate(grads, channel, fading_rng, interference_rng, config.mode, basis ? &*basis : nullptr);
    const double eta = lr(config.schedule, k);
    if (momentum) {
      auto [w_next, v_next] = momentum_step(w, v, g, beta, eta);
      w = std::move(w_next);
      v = std::move(v_next);
    } else {
      w = gd_step(w, g, eta);
    }
    if (options.record_aggregates) {
      out.aggregates.push_back(g);
      if (momentum) out.velocities.push_back(v);
    }
    // The metric and loss can overflow before the iterate itself does.
    const double err = all_finite(w) ? alpha_err(w, w_star, alpha, scratch) : nan;
    const double loss = std::isfinite(err) ? problem.loss(w) : nan;
    if (!std::isfinite(err) || !std::isfinite(loss)) {
      out.diverged = true;
      break;
    }
    out.alpha_err[k] = err;
    out.loss[k] = loss;
    out.rounds_completed = k;
    if (options.record_iterates) out.iterates.push_back(w);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double trimmed_mean(std::vector<double> values, double fraction) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(values.size())));
  if (2 * cut >= values.size()) return median(std::move(values));
  double acc = 0.0;
  for (std::size_t i = cut; i < values.size() - cut; ++i) acc += values[i];
  return acc / static_cast<double>(values.size() - 2 * cut);
}

TrajectoryStats summarize_trials(std::span<const TrialResult> trials, const TrainConfig& config, double alpha,
                                 bool parallel) {
  if (trials.empty()) throw std::invalid_argument("summarize_trials: no trials");
  const std::size_t len = trials.front().alpha_err.size();
  TrajectoryStats stats;
  stats.config = config;
  stats.metric_alpha = alpha;
  stats.mean_alpha_err.resize(len);
  stats.median_alpha_err.resize(len);
  stats.trimmed_mean_alpha_err.resize(len);
  stats.mean_loss.resize(len);
  stats.n_trials.resize(len);

  const auto rounds = static_cast<std::int64_t>(len);
  auto reduce_round = [&](std::size_t k) {
    std::vector<double> errs;
    errs.reserve(trials.size());
    double err_sum = 0.0;
    double loss_sum = 0.0;
    for (const auto& t : trials) {
      const double e = t.alpha_err[k];
      if (!std::isfinite(e)) continue;
      errs.push_back(e);
      err_sum += e;
      loss_sum += t.loss[k];
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto n = static_cast<double>(errs.size());
    stats.n_trials[k] = errs.size();
    stats.mean_alpha_err[k] = errs.empty() ? nan : err_sum / n;
    stats.mean_loss[k] = errs.empty() ? nan : loss_sum / n;
    stats.trimmed_mean_alpha_err[k] = trimmed_mean(errs, 0.1);
    stats.median_alpha_err[k] = median(std::move(errs));
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < rounds; ++k) reduce_round(static_cast<std::size_t>(k));
  } else {
    for (std::int64_t k = 0; k < rounds; ++k) reduce_round(static_cast<std::size_t>(k));
  }

  stats.final_alpha_err.reserve(trials.size());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    stats.final_alpha_err.push_back(trials[t].alpha_err.back());
    if (trials[t].diverged) stats.diverged_trials.push_back(t);
  }
  return stats;
}

namespace {

void check_setup(const FederatedProblem& problem, const ChannelModel& channel, const TrainConfig& config) {
  config.validate();
  channel.validate(problem.dim());
  if (channel.num_agents != problem.num_agents()) {
    throw std::invalid_argument("monte carlo: channel and problem disagree on the number of agents");
  }
}

}  // namespace

TrajectoryStats run_monte_carlo(const FederatedProblem& problem, const ChannelModel& channel,
                                const TrainConfig& config) {
  check_setup(problem, channel, config);
  std::vector<TrialResult> results(config.trials);
  const auto m = static_cast<std::int64_t>(config.trials);
  // Exceptions must not escape an OpenMP region; capture the first one by trial id.
  std::vector<std::exception_ptr> errors(config.trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < m; ++t) {
    try {
      results[static_cast<std::size_t>(t)] = run_trial(problem, channel, config, static_cast<std::uint64_t>(t));
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return summarize_trials(results, config, metric_alpha(config, channel), true);
}

TrajectoryStats run_monte_carlo_serial(const FederatedProblem& problem, const ChannelModel& channel,
                                       const TrainConfig& config) {
  check_setup(problem, channel, config);
  std::vector<TrialResult> results;
  results.reserve(config.trials);
  for (std::size_t t = 0; t < config.trials; ++t) results.push_back(run_trial(problem, channel, config, t));
  return summarize_trials(results, config, metric_alpha(config, channel), false);
}

}  // namespace ota

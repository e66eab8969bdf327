#include "ota/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ota {

RateFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_power_law: need at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw std::invalid_argument("fit_power_law: log-log fit needs positive finite values");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: x values are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  fit.points = x.size();
  return fit;
}

std::vector<std::size_t> log_spaced_rounds(std::size_t lo, std::size_t hi, std::size_t per_decade) {
  if (lo < 1 || hi < lo) throw std::invalid_argument("log_spaced_rounds: need 1 <= lo <= hi");
  std::vector<std::size_t> out{lo};
  if (per_decade == 0 || hi == lo) {
    if (hi != lo) out.push_back(hi);
    return out;
  }
  const double step = std::log(10.0) / static_cast<double>(per_decade);
  const double span = std::log(static_cast<double>(hi) / static_cast<double>(lo));
  const auto steps = static_cast<std::size_t>(std::ceil(span / step));
  for (std::size_t i = 1; i < steps; ++i) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::exp(step * static_cast<double>(i))));
    if (k > out.back() && k < hi) out.push_back(k);
  }
  out.push_back(hi);
  return out;
}

RateFit fit_rate(std::span<const double> errors, std::size_t k_min, std::size_t k_max, std::size_t points_per_decade) {
  if (k_min < 1 || k_max <= k_min) throw std::invalid_argument("fit_rate: need 1 <= k_min < k_max");
  if (k_max >= errors.size()) throw std::invalid_argument("fit_rate: window exceeds the trajectory");
  std::vector<double> x;
  std::vector<double> y;
  auto add = [&](std::size_t k) {
    if (!(errors[k] > 0.0) || !std::isfinite(errors[k])) {
      std::ostringstream msg;
      msg << "fit_rate: error at round " << k << " is " << errors[k] << ", log undefined";
      throw std::invalid_argument(msg.str());
    }
    x.push_back(static_cast<double>(k));
    y.push_back(errors[k]);
  };
  if (points_per_decade == 0) {
    for (std::size_t k = k_min; k <= k_max; ++k) add(k);
  } else {
    for (std::size_t k : log_spaced_rounds(k_min, k_max, points_per_decade)) add(k);
  }
  RateFit fit = fit_power_law(x, y);
  fit.k_min = k_min;
  fit.k_max = k_max;
  return fit;
}

RateFit fit_rate(const TrajectoryStats& stats, std::size_t k_min, std::size_t k_max, std::size_t points_per_decade) {
  return fit_rate(stats.mean_alpha_err, k_min, k_max, points_per_decade);
}

std::pair<std::size_t, std::size_t> default_fit_window(std::size_t rounds) {
  return {std::max<std::size_t>(1, rounds / 100), rounds};
}

double fading_noise_term(const BoundConstants& c) {
  const double a = c.alpha;
  return c.C + std::pow(c.sigma, a) * std::pow(c.G, a) * std::pow(static_cast<double>(c.d), 1.0 - 1.0 / a) /
                   std::pow(static_cast<double>(c.N), a / 2.0);
}

namespace {

void check_common(const BoundConstants& c, std::size_t k) {
  if (k < 1) throw std::invalid_argument("bound: k must be at least 1");
  if (!(c.alpha > 1.0 && c.alpha <= 2.0)) throw std::invalid_argument("bound: alpha must lie in (1, 2]");
  if (!(c.mu > 0.0 && c.L > 0.0 && c.theta > 0.0)) throw std::invalid_argument("bound: mu, L, theta must be positive");
  if (c.d < 1 || c.N < 1) throw std::invalid_argument("bound: d and N must be positive");
  if (c.C < 0.0 || c.G < 0.0 || c.sigma < 0.0) throw std::invalid_argument("bound: C, G, sigma must be non-negative");
}

}  // namespace

double theorem1_bound(const BoundConstants& c, std::size_t k) {
  check_common(c, k);
  const double a = c.alpha;
  const double margin = c.mu * c.theta * c.L - a + 1.0;
  if (!(c.theta > (a - 1.0) / (c.mu * c.L))) {
    std::ostringstream msg;
    msg << "theorem1_bound: needs theta > (alpha - 1) / (mu L) = " << (a - 1.0) / (c.mu * c.L) << ", got " << c.theta;
    throw std::domain_error(msg.str());
  }
  return 4.0 * std::pow(c.theta, a) * fading_noise_term(c) / margin * std::pow(static_cast<double>(k), -(a - 1.0));
}

double theorem2_bound(const BoundConstants& c, std::size_t k) {
  check_common(c, k);
  const double a = c.alpha;
  const double b = c.beta;
  if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("theorem2_bound: beta must lie in [0, 1)");
  if (!(c.theta > (a - 1.0) * (1.0 - b) / (c.mu * c.L))) {
    std::ostringstream msg;
    msg << "theorem2_bound: needs theta > (alpha - 1)(1 - beta) / (mu L) = " << (a - 1.0) * (1.0 - b) / (c.mu * c.L)
        << ", got " << c.theta;
    throw std::domain_error(msg.str());
  }
  const double interference = 4.0 * c.C / (1.0 - std::pow(b, a));
  const double fading = std::pow(c.sigma, a) * std::pow(c.G, a) * std::pow(static_cast<double>(c.d), 1.0 - 1.0 / a) /
                        (std::pow(static_cast<double>(c.N), a / 2.0) * std::pow(1.0 - b * b, a / 2.0));
  const double margin = c.mu * c.theta * c.L / (1.0 - b) - a + 1.0;
  return 4.0 * std::pow(c.theta, a) * (interference + fading) / margin * std::pow(static_cast<double>(k), -(a - 1.0));
}

double corollary_rate(double rho, double alpha) { return -rho * (alpha - 1.0); }

double generalization_bound(double B, double alpha, double lambda, std::size_t dataset_size, double p) {
  if (!(B > 0.0)) throw std::invalid_argument("generalization_bound: B must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("generalization_bound: lambda must be positive");
  if (dataset_size < 1) throw std::invalid_argument("generalization_bound: dataset must be non-empty");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("generalization_bound: p must lie in (0, 1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("generalization_bound: alpha must be positive");
  const auto n = static_cast<double>(dataset_size);
  if (!(lambda * lambda * n > 1.0)) throw std::invalid_argument("generalization_bound: needs lambda^2 |D| > 1");
  return B * std::sqrt(2.0 * alpha * std::log(lambda * lambda * n) / n + std::log(1.0 / p) / n);
}

CalibratedC calibrate_c(const StableParams& params, std::size_t dim, std::size_t samples, std::uint64_t seed,
                        double quantile) {
  if (samples < 1 || dim < 1) throw std::invalid_argument("calibrate_c: need samples >= 1 and dim >= 1");
  if (!(quantile > 0.0 && quantile <= 1.0)) throw std::invalid_argument("calibrate_c: quantile must lie in (0, 1]");
  const auto draws = sample_stable_batch(params, samples * dim, seed);
  std::vector<double> norms(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    norms[s] = alpha_norm_pow(std::span<const double>(draws.data() + s * dim, dim), params.alpha);
  }
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  const auto idx = std::min(samples - 1, static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(samples))) - 1);
  CalibratedC out;
  out.cap = sorted[idx];
  out.quantile = quantile;
  out.samples = samples;
  double acc = 0.0;
  for (double v : norms) acc += std::min(v, out.cap);
  out.value = acc / static_cast<double>(samples);
  return out;
}

OneStepCheck one_step_recursion(const FederatedProblem& problem, const ChannelModel& channel,
                                std::span<const double> w, double eta, double c_hat, double L, std::size_t draws,
                                std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("one_step_recursion: need at least one draw");
  if (!(eta > 0.0)) throw std::invalid_argument("one_step_recursion: eta must be positive");
  const std::size_t d = problem.dim();
  if (w.size() != d) throw std::invalid_argument("one_step_recursion: state has wrong dimension");
  const double alpha = channel.interference ? channel.interference->alpha : 2.0;
  const auto& w_star = problem.minimizer();

  std::vector<Vec> grads;
  problem.local_gradients(w, grads);
  double g_max = 0.0;
  for (const auto& g : grads) g_max = std::max(g_max, std::sqrt(dot(g, g)));

  OneStepCheck out;
  out.eta = eta;
  out.G = g_max;
  Vec delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = w[i] - w_star[i];
  out.current_err = alpha_norm_pow(delta, alpha);

  double acc = 0.0;
  for (std::size_t s = 0; s < draws; ++s) {
    RngStream fading_rng(seed, derive_stream_id({0x0e57e9ULL, s, 0}));
    RngStream interference_rng(seed, derive_stream_id({0x0e57e9ULL, s, 1}));
    const Vec g = ota_aggregate(grads, channel, fading_rng, interference_rng);
    for (std::size_t i = 0; i < d; ++i) delta[i] = w[i] - eta * g[i] - w_star[i];
    acc += alpha_norm_pow(delta, alpha);
  }
  out.empirical_next_err = acc / static_cast<double>(draws);

  BoundConstants c;
  c.C = c_hat;
  c.G = g_max;
  c.sigma = channel.fading_sigma();
  c.mu = channel.fading_mean;
  c.L = L;
  c.d = d;
  c.N = problem.num_agents();
  c.alpha = alpha;
  out.rhs = (1.0 - eta * c.mu * L) * out.current_err + 4.0 * fading_noise_term(c) * std::pow(eta, alpha);
  return out;
}

}  // namespace ota

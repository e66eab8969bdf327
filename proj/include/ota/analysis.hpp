#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "ota/channel.hpp"
#include "ota/objectives.hpp"
#include "ota/stable_noise.hpp"
#include "ota/trainer.hpp"

namespace ota {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log x, log y). All x, y must be positive.
RateFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Log-log fit of mean_alpha_err[k] for k in [k_min, k_max]. With
/// points_per_decade == 0 every round is used; otherwise rounds are taken on a
/// geometric grid so each decade carries equal weight.
RateFit fit_rate(const TrajectoryStats& stats, std::size_t k_min, std::size_t k_max,
                 std::size_t points_per_decade = 0);
RateFit fit_rate(std::span<const double> errors, std::size_t k_min, std::size_t k_max,
                 std::size_t points_per_decade = 0);

/// Last two decades of a K-round run: [max(1, K / 100), K].
std::pair<std::size_t, std::size_t> default_fit_window(std::size_t rounds);

/// Distinct integers on a geometric grid in [lo, hi], both ends included.
std::vector<std::size_t> log_spaced_rounds(std::size_t lo, std::size_t hi, std::size_t per_decade);

struct BoundConstants {
  double C = 1.0;
  double G = 1.0;
  double sigma = 0.0;
  double mu = 1.0;
  double L = 1.0;
  double theta = 1.0;
  std::size_t d = 1;
  std::size_t N = 1;
  double alpha = 1.5;
  double beta = 0.0;
};

/// Noise floor shared by both theorems: C + sigma^a G^a d^{1-1/a} / N^{a/2}.
double fading_noise_term(const BoundConstants& c);

/// 4 theta^a (C + sigma^a G^a d^{1-1/a} / N^{a/2}) / (mu theta L - a + 1) * k^{-(a-1)}.
/// Requires theta > (a - 1) / (mu L).
double theorem1_bound(const BoundConstants& c, std::size_t k);

/// Momentum counterpart:
/// 4 theta^a (4C / (1 - b^a) + sigma^a G^a d^{1-1/a} / (N^{a/2} (1 - b^2)^{a/2}))
///   / (mu theta L / (1 - b) - a + 1) * k^{-(a-1)},
/// requiring theta > (a - 1)(1 - b) / (mu L). At b = 0 the C term is 4C, not C.
double theorem2_bound(const BoundConstants& c, std::size_t k);

/// Predicted log-log exponent -rho (a - 1) for eta_k ~ k^-rho.
double corollary_rate(double rho, double alpha);

/// B sqrt(2 a log(lambda^2 |D|) / |D| + log(1/p) / |D|).
double generalization_bound(double B, double alpha, double lambda, std::size_t dataset_size, double p);

/// Empirical stand-in for the alpha-moment constant C = E ||xi||_a^a.
///
/// The exact moment sits on the boundary of existence for alpha-stable noise,
/// so the sample mean is taken after capping each ||xi||_a^a at its
/// `quantile` empirical quantile (default 99.9%). Reports carry the cap.
struct CalibratedC {
  double value = 0.0;
  double cap = 0.0;
  double quantile = 0.999;
  std::size_t samples = 0;
};
CalibratedC calibrate_c(const StableParams& params, std::size_t dim, std::size_t samples, std::uint64_t seed,
                        double quantile = 0.999);

/// One-round recursion check at a fixed state w_k:
///   E ||Delta_{k+1}||_a^a <= (1 - eta mu L) ||Delta_k||_a^a + 4 (C + sigma^a G^a d^{1-1/a} / N^{a/2}) eta^a,
/// with the left side estimated over `draws` independent channel realisations
/// and G taken as max_n ||grad f_n(w_k)||.
struct OneStepCheck {
  double current_err = 0.0;
  double eta = 0.0;
  double empirical_next_err = 0.0;
  double rhs = 0.0;
  double G = 0.0;
};
OneStepCheck one_step_recursion(const FederatedProblem& problem, const ChannelModel& channel,
                                std::span<const double> w, double eta, double c_hat, double L, std::size_t draws,
                                std::uint64_t seed);

}  // namespace ota

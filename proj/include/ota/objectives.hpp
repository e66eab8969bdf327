#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ota/alpha_core.hpp"

namespace ota {

/// f(w) = (1/N) sum_n f_n(w) with per-agent gradients and a known minimiser.
class FederatedProblem {
public:
  virtual ~FederatedProblem() = default;

  std::size_t num_agents() const noexcept { return num_agents_; }
  std::size_t dim() const noexcept { return dim_; }
  virtual std::string kind() const = 0;

  virtual double local_loss(std::size_t agent, std::span<const double> w) const = 0;
  /// Writes grad f_agent(w) into `out` (size d).
  virtual void local_gradient(std::size_t agent, std::span<const double> w, std::span<double> out) const = 0;
  virtual Matrix hessian(std::span<const double> w) const = 0;
  /// sup ||grad f_n(w)|| over n and the Euclidean ball of `radius` around w*.
  virtual double gradient_bound(double radius) const = 0;

  Vec local_gradient(std::size_t agent, std::span<const double> w) const;
  /// All N local gradients at w, written into `out` (resized as needed).
  void local_gradients(std::span<const double> w, std::vector<Vec>& out) const;
  double loss(std::span<const double> w) const;
  Vec gradient(std::span<const double> w) const;

  const Vec& minimizer() const noexcept { return minimizer_; }
  /// Strong convexity constant.
  double gamma() const noexcept { return gamma_; }
  /// Smoothness constant.
  double lambda() const noexcept { return lambda_; }

protected:
  FederatedProblem(std::size_t n, std::size_t d) : num_agents_(n), dim_(d) {}

  std::size_t num_agents_;
  std::size_t dim_;
  Vec minimizer_;
  double gamma_ = 0.0;
  double lambda_ = 0.0;
};

using ProblemPtr = std::shared_ptr<const FederatedProblem>;

/// f_n(w) = 0.5 ||w - c_n||^2; w* is the mean of the centres, gamma = lambda = 1.
class QuadraticProblem final : public FederatedProblem {
public:
  explicit QuadraticProblem(std::vector<Vec> centers);

  std::string kind() const override { return "quadratic"; }
  double local_loss(std::size_t agent, std::span<const double> w) const override;
  void local_gradient(std::size_t agent, std::span<const double> w, std::span<double> out) const override;
  using FederatedProblem::local_gradient;
  Matrix hessian(std::span<const double> w) const override;
  double gradient_bound(double radius) const override;

  const std::vector<Vec>& centers() const noexcept { return centers_; }

private:
  std::vector<Vec> centers_;
};

/// L2-regularised logistic regression, one local dataset per agent.
class LogisticProblem final : public FederatedProblem {
public:
  /// features[n] is row-major (m_n x d); labels[n] holds +-1 entries.
  /// The minimiser is found with oracle_minimize at construction.
  LogisticProblem(std::size_t dim, std::vector<std::vector<double>> features,
                  std::vector<std::vector<double>> labels, double l2_reg);

  std::string kind() const override { return "logistic"; }
  double local_loss(std::size_t agent, std::span<const double> w) const override;
  void local_gradient(std::size_t agent, std::span<const double> w, std::span<double> out) const override;
  using FederatedProblem::local_gradient;
  Matrix hessian(std::span<const double> w) const override;
  double gradient_bound(double radius) const override;

  double l2_reg() const noexcept { return l2_reg_; }
  /// Residual ||grad f(w*)|| left by the oracle.
  double oracle_residual() const noexcept { return oracle_residual_; }

private:
  std::size_t samples(std::size_t agent) const { return labels_[agent].size(); }

  std::vector<std::vector<double>> features_;
  std::vector<std::vector<double>> labels_;
  double l2_reg_;
  std::vector<double> mean_feature_norm_;
  double oracle_residual_ = 0.0;
};

std::shared_ptr<QuadraticProblem> make_quadratic(std::vector<Vec> centers);
/// Centres drawn i.i.d. Normal(0, center_scale^2) per coordinate.
std::shared_ptr<QuadraticProblem> make_quadratic(std::size_t num_agents, std::size_t dim, std::uint64_t seed,
                                                 double center_scale = 1.0);

/// Synthetic data: labels +-1 with equal odds, features Normal(y * m + b_n, I)
/// with a shared class direction m and a per-agent offset b_n.
std::shared_ptr<FederatedProblem> make_logistic(std::size_t num_agents, std::size_t dim,
                                                std::size_t samples_per_agent, double l2_reg, std::uint64_t seed);
std::shared_ptr<FederatedProblem> make_logistic_from_data(std::size_t num_agents, std::size_t dim,
                                                          std::vector<std::vector<double>> features,
                                                          std::vector<std::vector<double>> labels, double l2_reg);

class OracleError : public std::runtime_error {
public:
  OracleError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Noiseless full-gradient descent with step 1/lambda from the origin until
/// ||grad f|| < tol. Throws OracleError when the budget runs out.
Vec oracle_minimize(const FederatedProblem& problem, double tol, std::size_t max_iters = 1'000'000);

/// Sampled curvature ratios 2 (f(w) - f(v) - <grad f(v), w - v>) / ||w - v||^2
/// over random pairs in the ball of `radius` around w*. Assumptions 1-2 hold on
/// the sample when min_ratio >= gamma and max_ratio <= lambda.
struct CurvatureProbe {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double max_local_gradient_norm = 0.0;
};
CurvatureProbe probe_curvature(const FederatedProblem& problem, std::size_t pairs, double radius,
                               std::uint64_t seed);

/// Key-value description of a testbed, as read from the config file.
struct ProblemSpec {
  std::string type = "quadratic";
  std::size_t num_agents = 100;
  std::size_t dim = 10;
  std::uint64_t seed = 1;
  double center_scale = 1.0;
  std::size_t samples_per_agent = 50;
  double l2_reg = 0.1;
};

ProblemPtr make_problem(const ProblemSpec& spec);

}  // namespace ota

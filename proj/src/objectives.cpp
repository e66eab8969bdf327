#include "ota/objectives.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ota/rng.hpp"

namespace ota {

Vec FederatedProblem::local_gradient(std::size_t agent, std::span<const double> w) const {
  Vec out(dim_);
  local_gradient(agent, w, out);
  return out;
}

void FederatedProblem::local_gradients(std::span<const double> w, std::vector<Vec>& out) const {
  out.resize(num_agents_);
  for (std::size_t n = 0; n < num_agents_; ++n) {
    out[n].resize(dim_);
    local_gradient(n, w, out[n]);
  }
}

double FederatedProblem::loss(std::span<const double> w) const {
  double acc = 0.0;
  for (std::size_t n = 0; n < num_agents_; ++n) acc += local_loss(n, w);
  return acc / static_cast<double>(num_agents_);
}

Vec FederatedProblem::gradient(std::span<const double> w) const {
  Vec acc(dim_, 0.0);
  Vec g(dim_);
  for (std::size_t n = 0; n < num_agents_; ++n) {
    local_gradient(n, w, g);
    for (std::size_t i = 0; i < dim_; ++i) acc[i] += g[i];
  }
  for (auto& x : acc) x /= static_cast<double>(num_agents_);
  return acc;
}

namespace {

double euclid(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double euclid_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

}  // namespace

// ---- quadratic ----------------------------------------------------------

QuadraticProblem::QuadraticProblem(std::vector<Vec> centers)
    : FederatedProblem(centers.size(), centers.empty() ? 0 : centers.front().size()), centers_(std::move(centers)) {
  if (num_agents_ < 1 || dim_ < 1) throw std::invalid_argument("quadratic: need N >= 1 and d >= 1");
  minimizer_.assign(dim_, 0.0);
  for (const auto& c : centers_) {
    if (c.size() != dim_) throw std::invalid_argument("quadratic: centres differ in dimension");
    require_finite(c, "quadratic centre");
    for (std::size_t i = 0; i < dim_; ++i) minimizer_[i] += c[i];
  }
  for (auto& x : minimizer_) x /= static_cast<double>(num_agents_);
  gamma_ = 1.0;
  lambda_ = 1.0;
}

double QuadraticProblem::local_loss(std::size_t agent, std::span<const double> w) const {
  const double r = euclid_dist(w, centers_[agent]);
  return 0.5 * r * r;
}

void QuadraticProblem::local_gradient(std::size_t agent, std::span<const double> w, std::span<double> out) const {
  const auto& c = centers_[agent];
  for (std::size_t i = 0; i < dim_; ++i) out[i] = w[i] - c[i];
}

Matrix QuadraticProblem::hessian(std::span<const double>) const { return Matrix::identity(dim_); }

double QuadraticProblem::gradient_bound(double radius) const {
  double worst = 0.0;
  for (const auto& c : centers_) worst = std::max(worst, euclid_dist(minimizer_, c));
  return worst + radius;
}

std::shared_ptr<QuadraticProblem> make_quadratic(std::vector<Vec> centers) {
  return std::make_shared<QuadraticProblem>(std::move(centers));
}

std::shared_ptr<QuadraticProblem> make_quadratic(std::size_t num_agents, std::size_t dim, std::uint64_t seed,
                                                 double center_scale) {
  RngStream rng(seed, derive_stream_id({0xce47e5ULL}));
  std::vector<Vec> centers(num_agents, Vec(dim));
  for (auto& c : centers)
    for (auto& x : c) x = center_scale * rng.normal();
  return make_quadratic(std::move(centers));
}

// ---- logistic -----------------------------------------------------------

namespace {

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) { return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LogisticProblem::LogisticProblem(std::size_t dim, std::vector<std::vector<double>> features,
                                 std::vector<std::vector<double>> labels, double l2_reg)
    : FederatedProblem(labels.size(), dim), features_(std::move(features)), labels_(std::move(labels)), l2_reg_(l2_reg) {
  if (num_agents_ < 1 || dim_ < 1) throw std::invalid_argument("logistic: need N >= 1 and d >= 1");
  if (!(l2_reg > 0.0)) throw std::invalid_argument("logistic: l2_reg must be positive for strong convexity");
  if (features_.size() != labels_.size()) throw std::invalid_argument("logistic: features/labels agent count mismatch");

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  mean_feature_norm_.resize(num_agents_);
  for (std::size_t n = 0; n < num_agents_; ++n) {
    const std::size_t m = labels_[n].size();
    if (m == 0) throw std::invalid_argument("logistic: every agent needs at least one sample");
    if (features_[n].size() != m * dim_) throw std::invalid_argument("logistic: feature block has wrong size");
    require_finite(features_[n], "logistic features");
    for (double y : labels_[n]) {
      if (y != 1.0 && y != -1.0) throw std::invalid_argument("logistic: labels must be +1 or -1");
    }
    double norm_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      Eigen::Map<const Eigen::VectorXd> x(features_[n].data() + i * dim_, static_cast<Eigen::Index>(dim_));
      gram.noalias() += x * x.transpose() / static_cast<double>(m);
      norm_sum += x.norm();
    }
    mean_feature_norm_[n] = norm_sum / static_cast<double>(m);
  }
  gram /= static_cast<double>(num_agents_);
  const double top = dim_ == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  gamma_ = l2_reg_;
  // sigma'(z) <= 1/4
  lambda_ = l2_reg_ + 0.25 * std::max(top, 0.0);

  minimizer_ = oracle_minimize(*this, 1e-12);
  oracle_residual_ = euclid(gradient(minimizer_));
}

double LogisticProblem::local_loss(std::size_t agent, std::span<const double> w) const {
  const auto& x = features_[agent];
  const auto& y = labels_[agent];
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] * dot(std::span<const double>(x.data() + i * dim_, dim_), w);
    acc += softplus_neg(z);
  }
  return acc / static_cast<double>(y.size()) + 0.5 * l2_reg_ * dot(w, w);
}

void LogisticProblem::local_gradient(std::size_t agent, std::span<const double> w, std::span<double> out) const {
  const auto& x = features_[agent];
  const auto& y = labels_[agent];
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::span<const double> xi(x.data() + i * dim_, dim_);
    const double coeff = -y[i] * sigmoid(-y[i] * dot(xi, w));
    for (std::size_t j = 0; j < dim_; ++j) out[j] += coeff * xi[j];
  }
  const double inv_m = 1.0 / static_cast<double>(y.size());
  for (std::size_t j = 0; j < dim_; ++j) out[j] = out[j] * inv_m + l2_reg_ * w[j];
}

Matrix LogisticProblem::hessian(std::span<const double> w) const {
  Matrix h = Matrix::identity(dim_, l2_reg_);
  for (std::size_t n = 0; n < num_agents_; ++n) {
    const auto& x = features_[n];
    const double scale = 1.0 / static_cast<double>(samples(n) * num_agents_);
    for (std::size_t i = 0; i < samples(n); ++i) {
      const std::span<const double> xi(x.data() + i * dim_, dim_);
      const double s = sigmoid(dot(xi, w));
      const double c = s * (1.0 - s) * scale;
      for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t col = 0; col < dim_; ++col) h(r, col) += c * xi[r] * xi[col];
    }
  }
  return h;
}

double LogisticProblem::gradient_bound(double radius) const {
  const double w_norm = euclid(minimizer_) + radius;
  double worst = 0.0;
  for (double m : mean_feature_norm_) worst = std::max(worst, m + l2_reg_ * w_norm);
  return worst;
}

std::shared_ptr<FederatedProblem> make_logistic_from_data(std::size_t num_agents, std::size_t dim,
                                                          std::vector<std::vector<double>> features,
                                                          std::vector<std::vector<double>> labels, double l2_reg) {
  if (labels.size() != num_agents) throw std::invalid_argument("logistic: label blocks must match N");
  return std::make_shared<LogisticProblem>(dim, std::move(features), std::move(labels), l2_reg);
}

std::shared_ptr<FederatedProblem> make_logistic(std::size_t num_agents, std::size_t dim,
                                                std::size_t samples_per_agent, double l2_reg, std::uint64_t seed) {
  if (samples_per_agent < 1) throw std::invalid_argument("logistic: samples_per_agent must be positive");
  RngStream rng(seed, derive_stream_id({0x109157ULL}));
  Vec direction(dim);
  for (auto& x : direction) x = rng.normal();
  const double norm = euclid(direction);
  for (auto& x : direction) x /= norm;

  std::vector<std::vector<double>> features(num_agents);
  std::vector<std::vector<double>> labels(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) {
    Vec offset(dim);
    for (auto& x : offset) x = 0.5 * rng.normal();
    features[n].resize(samples_per_agent * dim);
    labels[n].resize(samples_per_agent);
    for (std::size_t i = 0; i < samples_per_agent; ++i) {
      const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
      labels[n][i] = y;
      for (std::size_t j = 0; j < dim; ++j) features[n][i * dim + j] = y * direction[j] + offset[j] + rng.normal();
    }
  }
  return make_logistic_from_data(num_agents, dim, std::move(features), std::move(labels), l2_reg);
}

// ---- oracle & probes ----------------------------------------------------

Vec oracle_minimize(const FederatedProblem& problem, double tol, std::size_t max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("oracle_minimize: tolerance must be positive");
  if (!(problem.lambda() > 0.0)) throw std::invalid_argument("oracle_minimize: smoothness constant must be positive");
  const double step = 1.0 / problem.lambda();
  Vec w(problem.dim(), 0.0);
  double residual = 0.0;
  for (std::size_t it = 0; it <= max_iters; ++it) {
    const Vec g = problem.gradient(w);
    residual = euclid(g);
    if (residual < tol) return w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
  }
  std::ostringstream msg;
  msg << "oracle_minimize: no convergence after " << max_iters << " iterations, residual " << residual;
  throw OracleError(msg.str(), residual);
}

CurvatureProbe probe_curvature(const FederatedProblem& problem, std::size_t pairs, double radius,
                               std::uint64_t seed) {
  const std::size_t d = problem.dim();
  RngStream rng(seed, derive_stream_id({0x9a0beULL}));
  const auto& center = problem.minimizer();
  auto draw = [&] {
    // Uniform in the ball: Gaussian direction, radius r * U^{1/d}.
    Vec dir(d);
    for (auto& x : dir) x = rng.normal();
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / euclid(dir);
    Vec p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = center[i] + r * dir[i];
    return p;
  };
  CurvatureProbe out{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  Vec g(d);
  for (std::size_t s = 0; s < pairs; ++s) {
    const Vec w = draw();
    const Vec v = draw();
    Vec diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = w[i] - v[i];
    const double dist2 = dot(diff, diff);
    if (dist2 == 0.0) continue;
    const double gap = problem.loss(w) - problem.loss(v) - dot(problem.gradient(v), diff);
    const double ratio = 2.0 * gap / dist2;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    for (std::size_t n = 0; n < problem.num_agents(); ++n) {
      problem.local_gradient(n, w, g);
      out.max_local_gradient_norm = std::max(out.max_local_gradient_norm, euclid(g));
    }
  }
  return out;
}

ProblemPtr make_problem(const ProblemSpec& spec) {
  if (spec.type == "quadratic") return make_quadratic(spec.num_agents, spec.dim, spec.seed, spec.center_scale);
  if (spec.type == "logistic") {
    return make_logistic(spec.num_agents, spec.dim, spec.samples_per_agent, spec.l2_reg, spec.seed);
  }
  throw std::invalid_argument("unknown problem type '" + spec.type + "' (expected quadratic or logistic)");
}

}  // namespace ota

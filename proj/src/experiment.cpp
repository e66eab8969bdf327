#include "ota/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace ota {

using json = nlohmann::ordered_json;

std::vector<std::size_t> csv_rounds(std::size_t rounds) {
  std::vector<std::size_t> out;
  const std::size_t dense = std::min<std::size_t>(rounds, 1000);
  for (std::size_t k = 0; k <= dense; ++k) out.push_back(k);
  if (rounds > 1000) {
    for (std::size_t k : log_spaced_rounds(1000, rounds, 100)) {
      if (k > 1000) out.push_back(k);
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_trajectory_csv(const TrajectoryStats& stats) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (std::size_t k : csv_rounds(stats.rounds())) {
    out += std::to_string(k) + "," + fmt(stats.mean_alpha_err[k]) + "," + fmt(stats.median_alpha_err[k]) + "," +
           fmt(stats.mean_loss[k]) + "," + std::to_string(stats.n_trials[k]) + "\n";
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

BoundConstants bound_constants(const ExperimentConfig& config, const FederatedProblem& problem,
                               CalibratedC* calibration) {
  const auto channel = config.channel_model();
  const auto train = config.train_config(problem);
  BoundConstants c;
  c.alpha = config.channel.alpha;
  c.mu = channel.fading_mean;
  c.sigma = channel.fading_sigma();
  c.L = config.analysis.L;
  c.theta = config.training.schedule == Schedule::Kind::theta_over_k ? config.training.theta : 1.0;
  c.d = problem.dim();
  c.N = problem.num_agents();
  c.beta = config.training.momentum ? config.training.beta : 0.0;

  double radius = 0.0;
  if (config.analysis.region_radius) {
    radius = *config.analysis.region_radius;
  } else {
    const auto& w0 = train.initial_point;
    const auto& ws = problem.minimizer();
    for (std::size_t i = 0; i < w0.size(); ++i) radius += (w0[i] - ws[i]) * (w0[i] - ws[i]);
    radius = std::sqrt(radius);
  }
  c.G = config.analysis.G ? *config.analysis.G : problem.gradient_bound(radius);

  if (config.analysis.C) {
    c.C = *config.analysis.C;
  } else if (!channel.interference) {
    c.C = 0.0;
  } else {
    const auto cal = calibrate_c(*channel.interference, problem.dim(), config.analysis.c_samples,
                                 config.training.seed ^ 0xca11b4a7eULL);
    c.C = cal.value;
    if (calibration) *calibration = cal;
  }
  return c;
}

double predicted_exponent(const ExperimentConfig& config) {
  switch (config.training.schedule) {
    case Schedule::Kind::theta_over_k: return corollary_rate(1.0, config.channel.alpha);
    case Schedule::Kind::power: return corollary_rate(config.training.rho, config.channel.alpha);
    case Schedule::Kind::constant: return 0.0;
  }
  return 0.0;
}

std::vector<BoundReport> evaluate_bounds(const BoundConstants& constants, const std::vector<std::size_t>& ks) {
  std::vector<BoundReport> out;
  for (std::size_t k : ks) {
    BoundReport r;
    r.k = k;
    try {
      BoundConstants gd = constants;
      gd.beta = 0.0;
      r.theorem1 = theorem1_bound(gd, k);
    } catch (const std::domain_error&) {
    }
    try {
      r.theorem2 = theorem2_bound(constants, k);
    } catch (const std::domain_error&) {
    }
    out.push_back(r);
  }
  return out;
}

std::filesystem::path output_directory(const ExperimentConfig& config) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return config.output.directory;
}

namespace {

json config_echo(const ExperimentConfig& config) {
  json echo = json::object();
  std::istringstream in(render_config(config));
  std::string line;
  std::string section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      echo[section] = json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    echo[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return echo;
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& r) {
  json j;
  const auto& s = r.stats;
  const std::size_t k = s.rounds();
  j["metric_alpha"] = s.metric_alpha;
  j["rounds"] = k;
  j["trials"] = config.training.trials;
  j["fit"] = {{"slope", number_or_null(r.fit.slope)},
              {"intercept", number_or_null(r.fit.intercept)},
              {"r_squared", number_or_null(r.fit.r_squared)},
              {"k_min", r.fit.k_min},
              {"k_max", r.fit.k_max},
              {"points", r.fit.points}};
  if (!r.fit_error.empty()) j["fit"]["error"] = r.fit_error;
  j["predicted_exponent"] = r.predicted_exponent;
  j["final"] = {{"mean_alpha_err", number_or_null(s.mean_alpha_err[k])},
                {"median_alpha_err", number_or_null(s.median_alpha_err[k])},
                {"trimmed_mean_alpha_err", number_or_null(s.trimmed_mean_alpha_err[k])},
                {"mean_loss", number_or_null(s.mean_loss[k])}};
  j["initial_alpha_err"] = number_or_null(s.mean_alpha_err[0]);
  j["diverged_trials"] = s.diverged_trials;
  j["truncated"] = !s.diverged_trials.empty();
  const auto& c = r.constants;
  j["bound_constants"] = {{"C", c.C}, {"G", c.G}, {"sigma", c.sigma}, {"mu", c.mu}, {"L", c.L},
                          {"theta", c.theta}, {"d", c.d}, {"N", c.N}, {"alpha", c.alpha}, {"beta", c.beta}};
  if (r.c_calibrated) {
    j["C_calibration"] = {{"method", "mean of ||xi||_alpha^alpha capped at the empirical quantile"},
                          {"quantile", r.c_calibration.quantile},
                          {"cap", r.c_calibration.cap},
                          {"samples", r.c_calibration.samples}};
  }
  json bounds = json::array();
  for (const auto& b : r.bounds) {
    bounds.push_back({{"k", b.k},
                      {"theorem1", b.theorem1 ? json(*b.theorem1) : json(nullptr)},
                      {"theorem2", b.theorem2 ? json(*b.theorem2) : json(nullptr)},
                      {"mean_alpha_err", b.k <= k ? number_or_null(s.mean_alpha_err[b.k]) : json(nullptr)}});
  }
  j["bounds"] = bounds;
  j["generalization_bound"] = r.generalization;
  j["config"] = config_echo(config);
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  const auto problem = make_problem(config.problem);
  const auto channel = config.channel_model();
  const auto train = config.train_config(*problem);

  r.stats = run_monte_carlo(*problem, channel, train);
  const std::size_t k = r.stats.rounds();
  if (k >= 2) {
    auto [lo, hi] = default_fit_window(k);
    if (config.analysis.fit_k_max != 0) {
      lo = config.analysis.fit_k_min;
      hi = config.analysis.fit_k_max;
    }
    if (hi > lo) {
      try {
        r.fit = fit_rate(r.stats, lo, hi, config.analysis.fit_points_per_decade);
      } catch (const std::invalid_argument& e) {
        // Every trial left the window: report it instead of discarding the run.
        if (r.stats.diverged_trials.empty()) throw;
        r.fit = RateFit{};
        r.fit.slope = r.fit.intercept = r.fit.r_squared = std::numeric_limits<double>::quiet_NaN();
        r.fit.k_min = lo;
        r.fit.k_max = hi;
        r.fit_error = e.what();
      }
    }
  }
  r.predicted_exponent = predicted_exponent(config);
  r.constants = bound_constants(config, *problem, &r.c_calibration);
  r.c_calibrated = !config.analysis.C && config.channel.interference;
  r.bounds = evaluate_bounds(r.constants, config.analysis.bound_k);
  r.generalization = generalization_bound(config.analysis.B, config.channel.alpha, config.analysis.gen_lambda,
                                          config.analysis.dataset_size, config.analysis.p);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(dir);
  const auto csv_path = dir / "trajectory.csv";
  const auto summary_path = dir / "summary.json";
  try {
    if (config.output.csv) {
      write_atomic(csv_path, format_trajectory_csv(r.stats));
      r.csv_path = csv_path;
    }
    if (config.output.summary) {
      write_atomic(summary_path, summary_json(config, r).dump(2) + "\n");
      r.summary_path = summary_path;
    }
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(csv_path, ec);
    std::filesystem::remove(summary_path, ec);
    throw;
  }
  return r;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "N" || name == "n" || name == "num_agents") return SweepAxis::num_agents;
  if (name == "rho") return SweepAxis::rho;
  if (name == "beta") return SweepAxis::beta;
  throw ConfigError("unknown sweep axis '" + name + "' (expected alpha, N, rho or beta)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::num_agents: return "N";
    case SweepAxis::rho: return "rho";
    case SweepAxis::beta: return "beta";
  }
  return "?";
}

namespace {

ExperimentConfig apply_axis(ExperimentConfig config, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::alpha: set_config_value(config, "channel.alpha", value); break;
    case SweepAxis::num_agents: set_config_value(config, "problem.num_agents", value); break;
    case SweepAxis::rho:
      config.training.schedule = Schedule::Kind::power;
      set_config_value(config, "training.rho", value);
      break;
    case SweepAxis::beta:
      config.training.momentum = true;
      set_config_value(config, "training.beta", value);
      break;
  }
  return config;
}

double axis_number(const std::string& v) { return std::stod(v); }

}  // namespace

SweepResult sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<std::string>& values,
                  const std::filesystem::path& dir) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) configs.push_back(apply_axis(config, axis, v));

  SweepResult result;
  result.axis = axis;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto sub = dir / (to_string(axis) + "_" + values[i]);
    ExperimentResult r;
    try {
      r = run_experiment(configs[i], sub);
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep " + to_string(axis) + "=" + values[i] + ": " + e.what());
    }
    const std::size_t k = r.stats.rounds();
    result.rows.push_back({values[i], r.fit.slope, r.stats.median_alpha_err[k], r.stats.mean_alpha_err[k],
                           r.stats.median_alpha_err[0], r.stats.diverged_trials.size()});
  }

  // Ordered by the numeric axis value for the verdict.
  std::vector<std::size_t> order(result.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return axis_number(result.rows[a].value) < axis_number(result.rows[b].value);
  });
  auto strictly_decreasing = [&](auto key) {
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (!(key(result.rows[order[i]]) < key(result.rows[order[i - 1]]))) return false;
    }
    return true;
  };
  switch (axis) {
    case SweepAxis::alpha:
      result.monotone = strictly_decreasing([](const SweepRow& r) { return r.slope; });
      result.verdict = *result.monotone ? "fitted slope steepens as alpha grows" : "fitted slopes not ordered by alpha";
      break;
    case SweepAxis::rho:
      result.monotone = strictly_decreasing([](const SweepRow& r) { return r.slope; });
      result.verdict = *result.monotone ? "fitted slope steepens as rho grows" : "fitted slopes not ordered by rho";
      break;
    case SweepAxis::num_agents:
      result.monotone = strictly_decreasing([](const SweepRow& r) { return r.final_median_err; });
      result.verdict = *result.monotone ? "final median error falls as N grows" : "final median error not ordered by N";
      break;
    case SweepAxis::beta: {
      bool all_converged = true;
      for (const auto& row : result.rows) {
        all_converged = all_converged && row.diverged == 0 && row.final_median_err < 0.01 * row.initial_median_err;
      }
      result.verdict = all_converged ? "all momentum weights converged" : "some momentum weight did not converge";
      break;
    }
  }

  std::string csv = to_string(axis) + ",fitted_slope,final_median_alpha_err,final_mean_alpha_err,diverged_trials\n";
  json rows = json::array();
  for (const auto& row : result.rows) {
    csv += row.value + "," + fmt(row.slope) + "," + fmt(row.final_median_err) + "," + fmt(row.final_mean_err) + "," +
           std::to_string(row.diverged) + "\n";
    rows.push_back({{"value", row.value},
                    {"fitted_slope", number_or_null(row.slope)},
                    {"final_median_alpha_err", number_or_null(row.final_median_err)},
                    {"final_mean_alpha_err", number_or_null(row.final_mean_err)},
                    {"diverged_trials", row.diverged}});
  }
  json summary = {{"axis", to_string(axis)},
                  {"rows", rows},
                  {"monotone", result.monotone ? json(*result.monotone) : json(nullptr)},
                  {"verdict", result.verdict}};
  std::filesystem::create_directories(dir);
  write_atomic(dir / "sweep_summary.csv", csv);
  write_atomic(dir / "sweep_summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace ota

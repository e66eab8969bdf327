#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ota/analysis.hpp"
#include "ota/config.hpp"
#include "ota/trainer.hpp"

namespace ota {

inline constexpr const char* kCsvHeader = "round,mean_alpha_err,median_alpha_err,mean_loss,n_trials";
inline constexpr const char* kOutputDirEnv = "OTASIM_OUTPUT_DIR";

/// Rounds written to the per-round CSV: every round up to 1000, then a
/// log-spaced grid (100 points per decade) that always ends at K.
std::vector<std::size_t> csv_rounds(std::size_t rounds);

std::string format_trajectory_csv(const TrajectoryStats& stats);

struct BoundReport {
  std::size_t k = 0;
  std::optional<double> theorem1;
  std::optional<double> theorem2;
};

struct ExperimentResult {
  TrajectoryStats stats;
  RateFit fit;
  /// Set when diverged trials left the fit window without finite values.
  std::string fit_error;
  double predicted_exponent = 0.0;
  BoundConstants constants;
  CalibratedC c_calibration;
  bool c_calibrated = false;
  std::vector<BoundReport> bounds;
  double generalization = 0.0;
  double wall_time_s = 0.0;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Constants for the closed-form bounds, filling "auto" entries from the
/// problem (G over the region around w*) and from a capped-moment calibration of C.
BoundConstants bound_constants(const ExperimentConfig& config, const FederatedProblem& problem,
                               CalibratedC* calibration = nullptr);

/// Predicted log-log exponent of the mean alpha-error for the configured schedule.
double predicted_exponent(const ExperimentConfig& config);

std::vector<BoundReport> evaluate_bounds(const BoundConstants& constants, const std::vector<std::size_t>& ks);

/// Output directory: $OTASIM_OUTPUT_DIR when set, else output.directory.
std::filesystem::path output_directory(const ExperimentConfig& config);

/// Runs the Monte-Carlo experiment, writes trajectory.csv and summary.json
/// into `dir` (write-then-rename) and returns everything it computed. On
/// failure no partial files are left behind.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

enum class SweepAxis { alpha, num_agents, rho, beta };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  std::string value;
  double slope = 0.0;
  double final_median_err = 0.0;
  double final_mean_err = 0.0;
  double initial_median_err = 0.0;
  std::size_t diverged = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::alpha;
  std::vector<SweepRow> rows;
  /// Engaged for axes with a predicted ordering (alpha, N, rho).
  std::optional<bool> monotone;
  std::string verdict;
};

/// One run_experiment per value (in `dir/<axis>_<value>/`) plus
/// sweep_summary.csv and sweep_summary.json in `dir`.
SweepResult sweep(const ExperimentConfig& config, SweepAxis axis, const std::vector<std::string>& values,
                  const std::filesystem::path& dir);

/// Writes `content` to `path` via a temporary file and an atomic rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ota

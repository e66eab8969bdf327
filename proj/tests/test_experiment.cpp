#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "ota/experiment.hpp"

using namespace ota;
namespace fs = std::filesystem;

namespace {

ExperimentConfig smoke() { return load_config(std::string(OTASIM_SOURCE_DIR) + "/configs/smoke.conf"); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("otasim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CsvRow {
  std::size_t round;
  double mean, median, loss;
  std::size_t n;
};

std::vector<CsvRow> parse_csv(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<CsvRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 5);
    rows.push_back({std::stoul(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                    std::stoul(cells[4])});
  }
  return rows;
}

}  // namespace

TEST_CASE("smoke run writes K + 1 rows with the exact header") {
  const auto dir = scratch("smoke");
  const auto r = run_experiment(smoke(), dir);
  std::string header;
  const auto rows = parse_csv(slurp(dir / "trajectory.csv"), header);
  CHECK(header == "round,mean_alpha_err,median_alpha_err,mean_loss,n_trials");
  REQUIRE(rows.size() == 11);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].round == k);
    CHECK(rows[k].n == 1);
    // %.17g round-trips doubles exactly.
    CHECK(rows[k].mean == r.stats.mean_alpha_err[k]);
    CHECK(rows[k].loss == r.stats.mean_loss[k]);
  }
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(slurp(dir / "summary.json").find("\"wall_time_s\"") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  auto c = smoke();
  c.training.trials = 4;
  c.training.rounds = 200;
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  run_experiment(c, a);
  run_experiment(c, b);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
}

TEST_CASE("momentum weight zero matches momentum off") {
  auto c = smoke();
  c.training.trials = 3;
  c.training.rounds = 100;
  const auto off = scratch("beta_off");
  run_experiment(c, off);
  const auto dir = scratch("beta_sweep");
  const auto s = sweep(c, SweepAxis::beta, {"0"}, dir);
  REQUIRE(s.rows.size() == 1);
  CHECK(slurp(off / "trajectory.csv") == slurp(dir / "beta_0" / "trajectory.csv"));
  CHECK(fs::exists(dir / "sweep_summary.csv"));
  CHECK(fs::exists(dir / "sweep_summary.json"));
}

TEST_CASE("sweep axis names") {
  CHECK(parse_sweep_axis("alpha") == SweepAxis::alpha);
  CHECK(parse_sweep_axis("N") == SweepAxis::num_agents);
  CHECK(parse_sweep_axis("rho") == SweepAxis::rho);
  CHECK(parse_sweep_axis("beta") == SweepAxis::beta);
  CHECK_THROWS(parse_sweep_axis("gamma"));
  CHECK_THROWS(sweep(smoke(), SweepAxis::alpha, {"0.8"}, scratch("bad_sweep")));
}

TEST_CASE("output directory override") {
  auto c = smoke();
  ::unsetenv(kOutputDirEnv);
  CHECK(output_directory(c) == fs::path("out/smoke"));
  ::setenv(kOutputDirEnv, "/tmp/elsewhere", 1);
  CHECK(output_directory(c) == fs::path("/tmp/elsewhere"));
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("csv rounds thin out beyond a thousand") {
  const auto small = csv_rounds(10);
  CHECK(small.size() == 11);
  const auto big = csv_rounds(100000);
  CHECK(big.front() == 0);
  CHECK(big.back() == 100000);
  CHECK(big.size() < 1400);
  CHECK(std::is_sorted(big.begin(), big.end()));
  CHECK(std::adjacent_find(big.begin(), big.end()) == big.end());
  for (std::size_t k = 0; k <= 1000; ++k) CHECK(big[k] == k);
}

TEST_CASE("bounds use calibrated constants") {
  const auto c = smoke();
  const auto p = make_problem(c.problem);
  CalibratedC cal;
  const auto k = bound_constants(c, *p, &cal);
  CHECK(k.C == cal.value);
  CHECK(cal.samples == c.analysis.c_samples);
  CHECK(k.G == doctest::Approx(p->gradient_bound(1.0)));
  CHECK(k.N == 5);
  CHECK(k.d == 3);
  const auto reports = evaluate_bounds(k, {10, 100});
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].theorem1.has_value());
  CHECK(predicted_exponent(c) == -0.5);
}

TEST_CASE("fully diverged runs are reported, not dropped") {
  auto c = smoke();
  c.training.schedule = Schedule::Kind::constant;
  c.training.eta = 1e6;
  c.training.rounds = 50;
  const auto dir = scratch("diverge");
  const auto r = run_experiment(c, dir);
  CHECK(r.stats.diverged_trials.size() == 1);
  CHECK_FALSE(r.fit_error.empty());
  const auto summary = slurp(dir / "summary.json");
  CHECK(summary.find("\"truncated\": true") != std::string::npos);
  CHECK(summary.find("\"error\"") != std::string::npos);
  std::string header;
  const auto rows = parse_csv(slurp(dir / "trajectory.csv"), header);
  CHECK(rows.back().n == 0);
}

TEST_CASE("write_atomic replaces files whole") {
  const auto dir = scratch("atomic");
  write_atomic(dir / "a.txt", "one");
  write_atomic(dir / "a.txt", "two");
  CHECK(slurp(dir / "a.txt") == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS(write_atomic(dir / "missing" / "a.txt", "x"));
}

TEST_CASE("mean error stays under three times the theorem 1 bound") {
  ExperimentConfig c;
  c.problem.num_agents = 50;
  c.problem.dim = 10;
  c.training.theta = 4.0;
  c.training.rounds = 2000;
  c.training.trials = 50;
  c.analysis.c_samples = 100000;
  const auto p = make_problem(c.problem);
  const auto stats = run_monte_carlo(*p, c.channel_model(), c.train_config(*p));
  const auto constants = bound_constants(c, *p);
  double worst = 0.0;
  for (std::size_t k = 100; k <= 2000; ++k)
    worst = std::max(worst, stats.mean_alpha_err[k] / theorem1_bound(constants, k));
  CHECK(worst <= 3.0);
}

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ota/stable_noise.hpp"
#include "ota/trainer.hpp"

namespace {

void stable_batch_serial(benchmark::State& state) {
  const ota::StableParams sp{1.5, 1.0};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ota::sample_stable_batch_serial(sp, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void stable_batch_omp(benchmark::State& state) {
  const ota::StableParams sp{1.5, 1.0};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ota::sample_stable_batch(sp, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

struct McSetup {
  std::shared_ptr<ota::QuadraticProblem> problem = ota::make_quadratic(50, 10, 1);
  ota::ChannelModel channel;
  ota::TrainConfig config;
  McSetup(std::size_t trials) {
    channel.num_agents = 50;
    config.rounds = 1000;
    config.trials = trials;
  }
};

void monte_carlo_serial(benchmark::State& state) {
  McSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ota::run_monte_carlo_serial(*s.problem, s.channel, s.config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void monte_carlo_omp(benchmark::State& state) {
  McSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ota::run_monte_carlo(*s.problem, s.channel, s.config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(stable_batch_serial)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(stable_batch_omp)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(monte_carlo_serial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(monte_carlo_omp)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

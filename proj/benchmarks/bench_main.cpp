#include <benchmark/benchmark.h>

#include <random>

#include "tuneprobe/measures.hpp"
#include "tuneprobe/solver.hpp"
#include "tuneprobe/targets.hpp"

namespace {

using namespace tuneprobe;

void BM_ForwardPass(benchmark::State& state) {
  const auto net = sthor_network(default_sthor_spec(static_cast<int>(state.range(0)), 3));
  Rng rng(1);
  const Stimulus x = sample_pink_noise(net.input_shape(), 1.0, 1.0, rng);
  ResponseVector r(static_cast<std::size_t>(net.response_dim()));
  for (auto _ : state) {
    net.evaluate_into(x.values(), r);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_ForwardPass)->Arg(1)->Arg(2);

// One solver budget worth of generations on a cheap objective, so the cost
// is dominated by sampling, sorting and covariance updates.
void BM_SolverGenerations(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Shape shape{1, static_cast<int>(n)};
  Rng rng(2);
  std::normal_distribution<double> g;
  std::vector<double> w(n);
  for (double& v : w) v = g(rng);
  const Stimulus target = project_sphere(w, 1.0, shape);
  const Objective objective = [&](std::span<const double> x) { return dot(x, target.values()); };
  const Stimulus x0 = sample_pink_noise(shape, 0.0, 1.0, rng);
  SolverConfig config;
  config.max_evaluations = static_cast<std::int64_t>(20 * n);
  config.step_tolerance = 1e-300;
  config.stagnation_window = 1 << 30;
  for (auto _ : state) {
    const auto result = maximize(objective, sphere_projection(1.0), x0, config);
    benchmark::DoNotOptimize(result.best_fitness);
  }
  state.SetItemsProcessed(state.iterations() * config.max_evaluations);
}
BENCHMARK(BM_SolverGenerations)->Arg(121)->Arg(441)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  Rng rng(3);
  const Shape shape{21, 21};
  const Stimulus a = sample_pink_noise(shape, 1.0, 1.0, rng);
  const Stimulus b = sample_pink_noise(shape, 1.0, 1.0, rng);
  const SsimParams params = ssim_params_for(a);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b, params));
}
BENCHMARK(BM_Ssim);

}  // namespace

BENCHMARK_MAIN();

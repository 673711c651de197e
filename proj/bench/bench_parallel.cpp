// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "metamodel/abm.hpp"
#include "metamodel/orbit.hpp"
#include "metamodel/polynomial.hpp"

using namespace metamodel;

namespace {

Dataset noisy_quadratic(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xs(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs(rng);
    d.xs.push_back(x);
    d.ys.push_back(x * x + 1 + noise(rng));
  }
  return d;
}

const OrbitGraph<FormalPolynomial>& selection_orbit() {
  static const auto orbit = explore_orbit(FormalPolynomial::one(), polynomial_actions(), 10);
  return orbit;
}

void BM_SelectModelSerial(benchmark::State& state) {
  const auto train = noisy_quadratic(1, static_cast<std::size_t>(state.range(0)));
  const auto val = noisy_quadratic(2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::select_model(selection_orbit(), train, val));
}

void BM_SelectModelParallel(benchmark::State& state) {
  const auto train = noisy_quadratic(1, static_cast<std::size_t>(state.range(0)));
  const auto val = noisy_quadratic(2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_model(selection_orbit(), train, val, static_cast<int>(state.range(1))));
  }
}

void BM_OrbitSerial(benchmark::State& state) {
  const auto actions = polynomial_actions();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::explore_orbit(FormalPolynomial::one(), actions, static_cast<std::size_t>(state.range(0))));
  }
}

void BM_OrbitParallel(benchmark::State& state) {
  const auto actions = polynomial_actions();
  OrbitOptions options;
  options.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        explore_orbit(FormalPolynomial::one(), actions, static_cast<std::size_t>(state.range(0)), options));
  }
}

std::vector<AbmRun> batch(const AbmSpec& spec, std::size_t runs) {
  std::vector<AbmRun> out;
  for (std::size_t i = 0; i < runs; ++i) out.push_back({&spec, 100, i});
  return out;
}

void BM_AbmBatchSerial(benchmark::State& state) {
  const auto spec = sirs_spec(0.4, 0.2, 0.1, 9000, 1000, 0);
  const auto runs = batch(spec, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::run_abm_batch(runs));
}

void BM_AbmBatchParallel(benchmark::State& state) {
  const auto spec = sirs_spec(0.4, 0.2, 0.1, 9000, 1000, 0);
  const auto runs = batch(spec, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_abm_batch(runs, static_cast<int>(state.range(1))));
}

}  // namespace

BENCHMARK(BM_SelectModelSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SelectModelParallel)->ArgsProduct({{2000}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OrbitSerial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrbitParallel)->ArgsProduct({{16}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AbmBatchSerial)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AbmBatchParallel)->ArgsProduct({{32}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

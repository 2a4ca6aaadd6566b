#include <benchmark/benchmark.h>

#include <random>

#include "coop/dynamics.hpp"
#include "coop/linalg.hpp"
#include "coop/lyapunov.hpp"

using namespace coop;

namespace {

Matrix random_metzler(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> off(0.05, 5.0), diag(-5.0, 5.0);
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = i == j ? diag(rng) : off(rng);
  return m;
}

void BM_PerronEigenpair(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const MetzlerMatrix m(random_metzler(rng, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(perron_eigenpair(m).lambda_max);
}
BENCHMARK(BM_PerronEigenpair)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_BirkhoffTau(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  const auto d = static_cast<std::size_t>(state.range(0));
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(birkhoff_tau(m));
}
BENCHMARK(BM_BirkhoffTau)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_IntegrateSwitching(benchmark::State& state) {
  const auto spec = EnvironmentSpec::markov_switch(
      Matrix{{0, 1}, {1, 0}}, {MetzlerMatrix{{-1, 0}, {10, -1}}, MetzlerMatrix{{-1, 10}, {0, -1}}});
  for (auto _ : state) {
    const auto e = estimate_lambda(spec, Seed{3}, LambdaMethod::ErgodicAverage, 100.0, 1e-2, 10.0);
    benchmark::DoNotOptimize(e.value);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_IntegrateSwitching)->Unit(benchmark::kMillisecond);

void BM_IntegratePeriodic(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto d = static_cast<std::size_t>(state.range(0));
  FourierMatrixMap map{random_metzler(rng, d), {}};
  Matrix c(d, d);
  for (std::size_t i = 0; i < d; ++i) c(i, i) = 0.5;
  map.coordinates.push_back({{c}, {Matrix(d, d)}});
  const auto spec = EnvironmentSpec::periodic(map);
  for (auto _ : state) {
    const auto e = estimate_lambda(spec, Seed{}, LambdaMethod::ErgodicAverage, 100.0, 1e-2, 10.0);
    benchmark::DoNotOptimize(e.value);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_IntegratePeriodic)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "divaug/selection.hpp"

namespace {

std::vector<divaug::ProbVector> pool(std::size_t count, std::size_t dim) {
  std::mt19937_64 gen(1);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<divaug::ProbVector> out(count, divaug::ProbVector(dim));
  for (auto& v : out) {
    double total = 0;
    for (auto& x : v) total += x = gamma(gen);
    for (auto& x : v) x /= total;
  }
  return out;
}

void BM_VarianceDiversity(benchmark::State& state) {
  const auto vectors = pool(static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(divaug::variance_diversity(vectors));
}
BENCHMARK(BM_VarianceDiversity)->Arg(4)->Arg(8)->Arg(64);

void BM_KmeansppSelect(benchmark::State& state) {
  const auto vectors = pool(static_cast<std::size_t>(state.range(0)), 10);
  divaug::RandomStream rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(divaug::kmeanspp_select(vectors, state.range(1), rng));
}
BENCHMARK(BM_KmeansppSelect)->Args({8, 4})->Args({4, 2})->Args({64, 16});

void BM_BruteForce(benchmark::State& state) {
  const auto vectors = pool(static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(divaug::brute_force_max_variance(vectors, state.range(1)));
}
BENCHMARK(BM_BruteForce)->Args({8, 4})->Args({16, 8});

}  // namespace

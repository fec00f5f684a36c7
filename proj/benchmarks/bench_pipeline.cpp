#include <benchmark/benchmark.h>

#include <random>

#include "divaug/strategy.hpp"

namespace {

// One image through expand, score and select at 32x32x3 with the default MLP.
void BM_GenerateViews(benchmark::State& state) {
  std::mt19937_64 gen(5);
  divaug::Image image(32, 32, 3);
  for (auto& v : image.pixels) v = static_cast<std::uint8_t>(gen());
  divaug::Architecture arch;
  arch.height = arch.width = 32;
  arch.channels = 3;
  arch.classes = 10;
  const auto model = divaug::OracleModel::initialize(arch, divaug::InputNormalization::identity(3), 6);
  divaug::StrategyParams params;
  params.strategy = static_cast<divaug::Strategy>(state.range(0));
  const std::vector<divaug::Image> pool{image};
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(divaug::generate_views(params, image, model, divaug::RandomStream(i++), pool));
  }
  state.SetLabel(std::string(divaug::to_string(params.strategy)));
}
BENCHMARK(BM_GenerateViews)->DenseRange(0, 3);

}  // namespace

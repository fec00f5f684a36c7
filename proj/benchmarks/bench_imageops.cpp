#include <benchmark/benchmark.h>

#include <random>

#include "divaug/imageops.hpp"

namespace {

divaug::Image noise(int side) {
  std::mt19937_64 gen(3);
  divaug::Image image(side, side, 3);
  for (auto& v : image.pixels) v = static_cast<std::uint8_t>(gen());
  return image;
}

void BM_ApplyTransform(benchmark::State& state) {
  const auto kind = divaug::kAllOpKinds[static_cast<std::size_t>(state.range(0))];
  const divaug::Image image = noise(32);
  const divaug::Image partner = noise(32);
  for (auto _ : state) benchmark::DoNotOptimize(divaug::apply_transform(kind, image, 0.7, &partner));
  state.SetLabel(std::string(divaug::to_string(kind)));
}
BENCHMARK(BM_ApplyTransform)->DenseRange(0, 15);

void BM_DefaultAugment(benchmark::State& state) {
  const divaug::Image image = noise(32);
  divaug::RandomStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(divaug::default_augment(image, divaug::DatasetKind::Cifar, rng));
}
BENCHMARK(BM_DefaultAugment);

}  // namespace

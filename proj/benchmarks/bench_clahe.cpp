#include <benchmark/benchmark.h>

#include <random>

#include "drowsy/clahe.hpp"
#include "drowsy/features.hpp"

namespace {

drowsy::GrayImage noise_image(int size) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> dist(30, 120);
  drowsy::GrayImage img(size, size);
  for (auto& px : img.pixels()) px = static_cast<std::uint8_t>(dist(gen));
  return img;
}

void BM_Clahe(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  const drowsy::ClaheConfig cfg{5.0, static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::clahe_enhance(img, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_GlobalHe(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::global_hist_equalize(img));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_PatchStats(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::patch_stats_featurize(img, 4));
}

}  // namespace

BENCHMARK(BM_Clahe)->Args({224, 8})->Args({224, 16})->Args({640, 8});
BENCHMARK(BM_GlobalHe)->Arg(224)->Arg(640);
BENCHMARK(BM_PatchStats)->Arg(224);

BENCHMARK_MAIN();

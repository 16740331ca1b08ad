#include <benchmark/benchmark.h>

#include <random>

#include "drowsy/evaluation.hpp"

namespace {

std::vector<drowsy::ScoredClip> random_scores(std::size_t n) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<drowsy::ScoredClip> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i].anomalous = i % 3 == 0;
    s[i].score = dist(gen) + (s[i].anomalous ? 1.0 : 0.0);
  }
  return s;
}

void BM_RocAuc(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::auc(drowsy::roc_curve(s)));
}

void BM_Evaluate(benchmark::State& state) {
  const auto s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::evaluate(s));
}

}  // namespace

BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);
BENCHMARK(BM_Evaluate)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();

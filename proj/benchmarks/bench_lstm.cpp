#include <benchmark/benchmark.h>

#include <random>

#include "drowsy/lstm.hpp"
#include "drowsy/training.hpp"

namespace {

Eigen::MatrixXd unit_rows(Eigen::Index n, Eigen::Index d, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  Eigen::MatrixXd f(n, d);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = dist(gen);
  f.rowwise().normalize();
  return f;
}

// Args: feature dim, hidden size, clip length.
void BM_Forward(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const auto d = state.range(0), h = state.range(1), n = state.range(2);
  const auto params = drowsy::init_params(d, h, 1);
  const auto clip = unit_rows(n, d, gen);
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::anomaly_score(clip, params));
}

void BM_Backward(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const auto d = state.range(0), h = state.range(1), n = state.range(2);
  const auto params = drowsy::init_params(d, h, 2);
  const auto clip = unit_rows(n, d, gen);
  for (auto _ : state) benchmark::DoNotOptimize(drowsy::backward(clip, params));
}

}  // namespace

BENCHMARK(BM_Forward)->Args({8, 16, 12})->Args({64, 64, 48})->Args({512, 128, 48});
BENCHMARK(BM_Backward)->Args({8, 16, 12})->Args({64, 64, 48})->Args({512, 128, 48});

BENCHMARK_MAIN();

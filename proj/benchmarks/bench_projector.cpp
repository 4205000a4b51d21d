#include <benchmark/benchmark.h>

#include <random>

#include "dsub/linalg.hpp"

namespace {

dsub::linalg::Matrix coefficients(long rows, long cols) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  dsub::linalg::Matrix m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_ProjectorUnloaded(benchmark::State& state) {
  const auto theta = coefficients(state.range(0) / 4 + 1, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsub::linalg::projector_from_coefficients(theta, 0.0));
  }
}
BENCHMARK(BM_ProjectorUnloaded)->RangeMultiplier(2)->Range(8, 128);

void BM_ProjectorLoaded(benchmark::State& state) {
  const auto theta = coefficients(state.range(0) / 4 + 1, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsub::linalg::projector_from_coefficients(theta, 1e-6));
  }
}
BENCHMARK(BM_ProjectorLoaded)->RangeMultiplier(2)->Range(8, 128);

}  // namespace

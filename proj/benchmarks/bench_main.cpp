#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "robustkern/corruption.hpp"
#include "robustkern/rng.hpp"
#include "robustkern/testing.hpp"

namespace {

using namespace robustkern;

TwoSampleData make_two_sample(int n, int d, std::uint64_t seed) {
  return TwoSampleData{generate(GaussianGenerator{0.0, 1.0, d}, n, derive_stream(seed, {0})),
                       generate(GaussianGenerator{0.0, 1.0, d}, n, derive_stream(seed, {1}))};
}

PairedData make_paired(int n, int d, std::uint64_t seed) {
  return PairedData{generate(GaussianGenerator{0.0, 1.0, d}, n, derive_stream(seed, {0})),
                    generate(GaussianGenerator{0.0, 1.0, d}, n, derive_stream(seed, {1}))};
}

void BM_GramMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto points = generate(GaussianGenerator{0.0, 1.0, 50}, n, 7);
  const KernelSpec kernel = make_gaussian_kernel(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_matrix(kernel, points));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramMatrix)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_MedianHeuristic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto points = generate(GaussianGenerator{0.0, 1.0, 50}, n, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(median_heuristic_bandwidth(points, DistanceNorm::kL2));
  }
}
BENCHMARK(BM_MedianHeuristic)->Range(64, 1024);

void BM_MmdPermutedStatistic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = make_two_sample(n, 50, 13);
  const MmdPermutationEvaluator evaluator(data, make_gaussian_kernel(1.0));
  const auto perm = sample_permutations(3, 1, 2 * n)[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluator.statistic(perm));
  }
}
BENCHMARK(BM_MmdPermutedStatistic)->Range(64, 512);

void BM_HsicPermutedStatistic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = make_paired(n, 50, 17);
  const HsicPermutationEvaluator evaluator(data, make_gaussian_kernel(1.0),
                                           make_gaussian_kernel(1.0));
  const auto perm = sample_permutations(5, 1, n)[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluator.statistic(perm));
  }
}
BENCHMARK(BM_HsicPermutedStatistic)->Range(64, 512);

void BM_DcTestEndToEnd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto data = make_two_sample(n, 10, 19);
  TestConfig config;
  config.alpha = 0.05;
  config.r = n / 10;
  config.num_permutations = 100;
  config.seed = 23;
  const StatisticKind kind = MmdStatistic{make_gaussian_kernel(3.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_dc_test(TestData{data}, kind, PermutationScheme::kFullPooled, config));
  }
}
BENCHMARK(BM_DcTestEndToEnd)->Range(50, 200);

}  // namespace

BENCHMARK_MAIN();

// Throughput of the hot paths on a full-size synthetic dataset.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "coveropt/coveropt.hpp"

namespace coveropt {
namespace {

const SynthDataset& dataset() {
  static const SynthDataset data = [] {
    SynthOptions o;
    o.seed = 8;
    return synthesize(o);
  }();
  return data;
}

const CoverageMatrix& matrix() {
  static const CoverageMatrix m = CoverageMatrix::over_demand(dataset().demand, 12);
  return m;
}

void BM_Haversine(benchmark::State& state) {
  const GeoPoint a{40.7, -74.0}, b{34.05, -118.25};
  for (auto _ : state) benchmark::DoNotOptimize(haversine_miles(a, b));
}
BENCHMARK(BM_Haversine);

void BM_IndexBuild(benchmark::State& state) {
  const auto& d = dataset().demand;
  for (auto _ : state) benchmark::DoNotOptimize(index_demand(d));
}
BENCHMARK(BM_IndexBuild)->Unit(benchmark::kMillisecond);

void BM_CoverageField(benchmark::State& state) {
  const auto& data = dataset();
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_field(data.demand, data.facilities, 12));
  }
}
BENCHMARK(BM_CoverageField)->Unit(benchmark::kMillisecond);

void BM_CoverageMatrix(benchmark::State& state) {
  const auto& d = dataset().demand;
  const double r = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(CoverageMatrix::over_demand(d, r));
}
BENCHMARK(BM_CoverageMatrix)->Arg(12)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_GreedyAdd(benchmark::State& state) {
  const auto& data = dataset();
  const auto field = compute_field(data.demand, data.facilities, 12);
  const auto baseline = covered_mask(field);
  const auto pool =
      greedy_pool(matrix(), baseline, Scope::nation(), CandidatePolicy::underserved);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(greedy_add(matrix(), baseline, k, pool));
}
BENCHMARK(BM_GreedyAdd)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RandomNetworks(benchmark::State& state) {
  std::mt19937_64 rng(108);
  std::vector<std::size_t> subset(dataset().demand.size());
  std::iota(subset.begin(), subset.end(), 0);
  std::shuffle(subset.begin(), subset.end(), rng);
  subset.resize(5000);
  std::sort(subset.begin(), subset.end());
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(random_search(
        matrix(), {200, samples, {std::numeric_limits<Persons>::max()}, 1}, subset));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RandomNetworks)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace coveropt

BENCHMARK_MAIN();

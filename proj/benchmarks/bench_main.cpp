// Microbenchmarks for the hot paths: farthest point sampling, brute-force
// k-NN, entropic transport, and one feature-extraction forward pass.

#include <benchmark/benchmark.h>

#include <random>

#include "galign/otmatch.hpp"
#include "galign/segnet.hpp"

using namespace galign;

namespace {

std::vector<double> random_points(std::size_t n, std::size_t d,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> p(n * d);
  for (auto& v : p) v = dist(rng);
  return p;
}

void BM_fps(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_points(n, 3, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(farthest_point_sample(pts, n, 3, n / 4, 0));
}
BENCHMARK(BM_fps)->Arg(256)->Arg(1024)->Arg(4096);

void BM_knn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pool = random_points(n, 16, 2);
  const auto queries = random_points(64, 16, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(knn(queries, 64, pool, n, 16, 8));
}
BENCHMARK(BM_knn)->Arg(256)->Arg(1024)->Arg(4096);

void BM_sinkhorn(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  CostMatrix cm;
  cm.rows = cm.cols = k;
  cm.entries.resize(k * k);
  for (auto& v : cm.entries) v = dist(rng);
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn(cm, 0.05, 100));
}
BENCHMARK(BM_sinkhorn)->Arg(4)->Arg(16)->Arg(64);

void BM_feature_forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  Block b;
  for (std::size_t i = 0; i < n; ++i) {
    b.points.insert(b.points.end(), {dist(rng), dist(rng), dist(rng)});
    b.labels.push_back(static_cast<int>(rng() % 4));
    b.source_indices.push_back(i);
  }
  SegnetConfig cfg;
  auto params = init_segnet_params(cfg, 6);
  for (auto _ : state) {
    Tape tape;
    auto feats = extract_features(tape, params, b, cfg);
    benchmark::DoNotOptimize(classify(tape, params, feats, b, cfg));
  }
}
BENCHMARK(BM_feature_forward)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

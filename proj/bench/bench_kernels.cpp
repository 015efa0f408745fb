#include <benchmark/benchmark.h>

#include <random>

#include "emofad/kernels.hpp"
#include "emofad/report.hpp"
#include "emofad/synthetic.hpp"

using namespace emofad;

namespace {

RowMatrix random_rows(Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_AccumulateSerial(benchmark::State& state) {
  const auto x = random_rows(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::accumulate_rows_serial(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AccumulateBlocked(benchmark::State& state) {
  const auto x = random_rows(state.range(0), state.range(1));
  const int jobs = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::accumulate_rows(x, jobs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct PairwiseFixture {
  GroupPartition partition;
  std::map<std::string, EmbeddingSet> embeddings;
};

PairwiseFixture make_pairwise(Eigen::Index per_group, Eigen::Index d, int encoders) {
  PairwiseFixture f;
  std::vector<std::string> ids;
  for (int q = 1; q <= 4; ++q) {
    auto& clips = f.partition.groups["Q" + std::to_string(q)];
    for (Eigen::Index i = 0; i < per_group; ++i) {
      ids.push_back("Q" + std::to_string(q) + "_" + std::to_string(i));
      clips.push_back(ids.back());
    }
  }
  for (int e = 0; e < encoders; ++e) {
    const auto spec = GaussianSpec::isotropic(Eigen::VectorXd::Zero(d), 1.0, static_cast<std::uint64_t>(e));
    const std::string name = "enc" + std::to_string(e);
    f.embeddings.emplace(name, EmbeddingSet(name, sample(spec, 4 * per_group).vectors(), ids));
  }
  return f;
}

void BM_PairwiseSerial(benchmark::State& state) {
  const auto f = make_pairwise(state.range(0), state.range(1), 4);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_fad_serial(f.partition, f.embeddings, {}));
}

void BM_PairwiseParallel(benchmark::State& state) {
  const auto f = make_pairwise(state.range(0), state.range(1), 4);
  PairwiseConfig config;
  config.jobs = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_fad(f.partition, f.embeddings, config));
}

}  // namespace

BENCHMARK(BM_AccumulateSerial)->Args({20000, 64})->Args({20000, 256});
BENCHMARK(BM_AccumulateBlocked)->ArgsProduct({{20000}, {64, 256}, {1, 2, 4, 8}});
BENCHMARK(BM_PairwiseSerial)->Args({1000, 128})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseParallel)->ArgsProduct({{1000}, {128}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

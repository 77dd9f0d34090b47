// OpenMP kernels against their serial references. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "uekit/blackbox.hpp"
#include "uekit/learn/scorer.hpp"
#include "uekit/rng.hpp"
#include "uekit/synth.hpp"
#include "uekit/tensor/kernels.hpp"

using namespace uekit;
using tensor::Tensor;
namespace k = tensor::kernels;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(rows, cols);
  for (auto& v : t.data) v = rng.normal();
  return t;
}

template <Tensor (*Fn)(const Tensor&, const Tensor&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul<k::matmul>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Matmul<k::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);

template <Tensor (*Fn)(const Tensor&)>
void BM_Softmax(benchmark::State& state) {
  const Tensor x = random_matrix(static_cast<std::size_t>(state.range(0)), 512, 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
}
BENCHMARK(BM_Softmax<k::softmax_rows>)->Name("softmax/parallel")->Arg(128)->Arg(1024);
BENCHMARK(BM_Softmax<k::serial::softmax_rows>)->Name("softmax/serial")->Arg(128)->Arg(1024);

template <Tensor (*Fn)(const Tensor&, double, std::vector<double>*)>
void BM_LayerNorm(benchmark::State& state) {
  const Tensor x = random_matrix(static_cast<std::size_t>(state.range(0)), 512, 4);
  std::vector<double> inv_std;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 1e-12, &inv_std));
}
BENCHMARK(BM_LayerNorm<k::layer_norm_rows>)->Name("layer_norm/parallel")->Arg(128)->Arg(1024);
BENCHMARK(BM_LayerNorm<k::serial::layer_norm_rows>)->Name("layer_norm/serial")->Arg(128)->Arg(1024);

const Dataset& bench_dataset() {
  static const Dataset d = [] {
    auto p = synth::SynthPreset::defaults(synth::PresetKind::kFusedSignal);
    p.n = 2000;
    p.seed = 5;
    return synth::generate(p);
  }();
  return d;
}

void BM_ScoreDataset(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const Dataset& d = bench_dataset();
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel ? score_dataset("semantic-entropy", d)
                                      : score_dataset_serial("semantic-entropy", d));
  }
  state.SetItemsProcessed(state.iterations() * d.records.size());
}
BENCHMARK(BM_ScoreDataset)->ArgName("parallel")->Arg(1)->Arg(0);

void BM_ScoreAll(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  const Dataset& d = bench_dataset();
  Dataset subset;
  subset.records.assign(d.records.begin(), d.records.begin() + 200);
  learn::ScorerSpec spec;
  spec.kind = learn::ScorerKind::kHarmony;
  spec.hidden_width = subset.records.front().hidden_states->cols;
  const learn::Scorer scorer(spec, 7, false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel ? learn::score_all(scorer, subset)
                                      : learn::score_all_serial(scorer, subset));
  }
  state.SetItemsProcessed(state.iterations() * subset.records.size());
}
BENCHMARK(BM_ScoreAll)->ArgName("parallel")->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

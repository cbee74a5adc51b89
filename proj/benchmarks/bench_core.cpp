#include <benchmark/benchmark.h>

#include "fzp300/filters.hpp"
#include "fzp300/linalg.hpp"
#include "fzp300/interpret.hpp"
#include "fzp300/model.hpp"
#include "fzp300/rng.hpp"
#include "fzp300/synth.hpp"
#include "fzp300/train.hpp"

using namespace fzp300;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

EpochSet bench_epochs(std::size_t n_trials) {
  SynthSpec spec;
  spec.n_target = n_trials / 5;
  spec.n_nontarget = n_trials - n_trials / 5;
  spec.seed = 99;
  return synth_oddball(spec, 8, 255, 256.0);
}

ModelDims bench_dims() {
  ModelDims dims;
  dims.n_channels = 8;
  dims.n_samples = 255;
  return dims;
}

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, n, 2);
  Matrix c;
  for (auto _ : state) {
    matmul_into(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_pseudoinverse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix p = random_matrix(16, n, 3);
  for (auto _ : state) {
    Matrix pinv = pseudoinverse(p);
    benchmark::DoNotOptimize(pinv.data());
  }
}
BENCHMARK(BM_pseudoinverse)->Arg(32)->Arg(127)->Arg(255);

void BM_bandpass_notch(benchmark::State& state) {
  const EpochSet data = bench_epochs(16);
  const FilterSpec spec;
  for (auto _ : state) {
    EpochSet filtered = bandpass_notch(data, spec);
    benchmark::DoNotOptimize(filtered.trials.data());
  }
  state.SetItemsProcessed(state.iterations() * data.n_trials() * data.n_channels);
}
BENCHMARK(BM_bandpass_notch);

void BM_forward_eval(benchmark::State& state) {
  const EpochSet data = bench_epochs(64);
  FuzzyModel model(bench_dims(), 7);
  model.set_mode(FuzzyModel::Mode::evaluation);
  std::vector<const Matrix*> ptrs;
  for (const Matrix& t : data.trials) ptrs.push_back(&t);
  for (auto _ : state) {
    std::vector<double> probs = model.predict_batch(ptrs);
    benchmark::DoNotOptimize(probs.data());
  }
  state.SetItemsProcessed(state.iterations() * data.n_trials());
}
BENCHMARK(BM_forward_eval);

void BM_train_step(benchmark::State& state) {
  const EpochSet data = bench_epochs(64);
  FuzzyModel model(bench_dims(), 7);
  model.set_mode(FuzzyModel::Mode::training);
  TrainConfig cfg;
  AdamW opt(model, cfg);
  std::vector<const Matrix*> ptrs;
  for (const Matrix& t : data.trials) ptrs.push_back(&t);
  for (auto _ : state) {
    model.forward_batch(ptrs, data.labels);
    model.backward();
    opt.step(1e-3);
  }
  state.SetItemsProcessed(state.iterations() * data.n_trials());
}
BENCHMARK(BM_train_step);

void BM_reconstruct_center(benchmark::State& state) {
  FuzzyModel model(bench_dims(), 7);
  for (auto _ : state) {
    auto center = reconstruct_center(model.temporal_bank(), 0, FilterKind::temporal);
    benchmark::DoNotOptimize(center.pattern.data());
  }
}
BENCHMARK(BM_reconstruct_center);

}  // namespace

BENCHMARK_MAIN();

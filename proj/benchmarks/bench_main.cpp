// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dgate/denoiser.hpp"
#include "dgate/generation.hpp"
#include "dgate/metrics.hpp"
#include "dgate/noise_schedule.hpp"
#include "dgate/random.hpp"
#include "dgate/timestep_distribution.hpp"

namespace {

using namespace dgate;

const Schedule& schedule() {
  static const Schedule s = Schedule::linear(1000, 1e-4, 0.02);
  return s;
}

void BM_PmfBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(TimestepPMF::from_ci({700.0, 1000.0, kDefaultZ}, 1000));
}
BENCHMARK(BM_PmfBuild);

void BM_PmfSample(benchmark::State& state) {
  const auto pmf = TimestepPMF::from_ci({700.0, 1000.0, kDefaultZ}, 1000);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(pmf.sample(rng));
}
BENCHMARK(BM_PmfSample);

NoisedBatch make_batch(int D, int B) {
  Rng rng(2);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> step(1, 1000);
  NoisedBatch b;
  b.x0.resize(D, B);
  b.eps.resize(D, B);
  for (Eigen::Index i = 0; i < b.x0.size(); ++i) b.x0.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < b.eps.size(); ++i) b.eps.data()[i] = normal(rng);
  for (int j = 0; j < B; ++j) b.t.push_back(step(rng));
  return b;
}

// Default training shape: D=32, E=32, hidden [128,128].
void BM_LossAndGrads(benchmark::State& state) {
  const auto params = init_params({32, 32, {128, 128}}, 0);
  const auto batch = make_batch(32, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(params, batch, schedule()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrads)->Arg(64)->Arg(256);

void BM_DdpmSample(benchmark::State& state) {
  const auto params = init_params({32, 32, {128, 128}}, 0);
  GenerationConfig cfg;
  cfg.num_samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ddpm_sample(params, schedule(), cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DdpmSample)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd gen(32, 1000), train(32, 512);
  for (Eigen::Index i = 0; i < gen.size(); ++i) gen.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(gen, train));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

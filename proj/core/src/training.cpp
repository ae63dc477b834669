// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

class Adam {
 public:
  Adam(const DenoiserParams& params, const AdamSettings& settings, double lr)
      : settings_(settings), lr_(lr), m_(Gradients::zeros_like(params)),
        v_(Gradients::zeros_like(params)) {}

  void step(DenoiserParams& params, const Gradients& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(settings_.beta1, t_);
    const double c2 = 1.0 - std::pow(settings_.beta2, t_);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      update(params.layers[i].weight, grads.layers[i].weight, m_.layers[i].weight,
             v_.layers[i].weight, c1, c2);
      update(params.layers[i].bias, grads.layers[i].bias, m_.layers[i].bias, v_.layers[i].bias,
             c1, c2);
    }
  }

 private:
  template <typename M>
  void update(M& p, const M& g, M& m, M& v, double c1, double c2) const {
    m = settings_.beta1 * m + (1.0 - settings_.beta1) * g;
    v = settings_.beta2 * v + (1.0 - settings_.beta2) * g.cwiseAbs2();
    p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + settings_.epsilon);
  }

  AdamSettings settings_;
  double lr_;
  Gradients m_;
  Gradients v_;
  int t_ = 0;
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train: batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidArgument("train: learning_rate must be finite and non-negative");
  if (checkpoint_every < 0) throw InvalidArgument("train: checkpoint_every must be >= 0");
  if (ci) ci->validate();
}

TrainConfig pretrain_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e-3;
  cfg.seed = seed;
  return cfg;
}

TrainConfig finetune_config(const CIConfig& ci, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-4;
  cfg.ci = ci;
  cfg.seed = seed;
  return cfg;
}

TimestepPMF pmf_for(const TrainConfig& cfg, int T) {
  return cfg.ci ? TimestepPMF::from_ci(*cfg.ci, T) : TimestepPMF::uniform(T);
}

TrainResult train(DenoiserParams params, const SignalDataset& data, const Schedule& schedule,
                  const TimestepPMF& pmf, const TrainConfig& cfg,
                  const CheckpointHook& on_checkpoint) {
  cfg.validate();
  if (data.size() == 0) throw InvalidArgument("train: dataset is empty");
  if (data.dim() != params.arch.input_dim)
    throw InvalidArgument("train: dataset has D=" + std::to_string(data.dim()) +
                          " but the network expects D=" + std::to_string(params.arch.input_dim));
  if (pmf.T() != schedule.T())
    throw InvalidArgument("train: pmf has T=" + std::to_string(pmf.T()) +
                          " but schedule has T=" + std::to_string(schedule.T()));

  const auto start = std::chrono::steady_clock::now();
  const int N = data.size();
  const int B = cfg.batch_size;
  const int D = data.dim();
  const int steps = (N + B - 1) / B;

  Rng shuffle_rng(derive_seed(cfg.seed, {1}));
  Rng draw_rng(derive_seed(cfg.seed, {2}));
  std::normal_distribution<double> normal(0.0, 1.0);

  TrainReport report;
  report.steps_per_epoch = steps;
  report.batch_size = B;
  report.timestep_histogram.assign(static_cast<std::size_t>(schedule.T()), 0);

  Adam adam(params, cfg.adam, cfg.learning_rate);
  std::vector<int> order(static_cast<std::size_t>(N));
  NoisedBatch batch;
  batch.x0.resize(D, B);
  batch.eps.resize(D, B);
  batch.t.resize(static_cast<std::size_t>(B));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (int s = 0; s < steps; ++s) {
      for (int j = 0; j < B; ++j) {
        const int idx = order[static_cast<std::size_t>((s * B + j) % N)];
        batch.x0.col(j) = data.signals.col(idx);
        const Timestep t = pmf.sample(draw_rng);
        batch.t[static_cast<std::size_t>(j)] = t;
        ++report.timestep_histogram[static_cast<std::size_t>(t - 1)];
        for (int i = 0; i < D; ++i) batch.eps(i, j) = normal(draw_rng);
      }
      LossAndGrads lg;
      const int global_step = epoch * steps + s;
      try {
        lg = loss_and_grads(params, batch, schedule);
      } catch (const DivergenceError&) {
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch + 1) + ", step " + std::to_string(s + 1) +
                              " (global step " + std::to_string(global_step + 1) + ")");
      }
      adam.step(params, lg.grads);
      if (!params.all_finite())
        throw DivergenceError("training diverged: non-finite parameters after global step " +
                              std::to_string(global_step + 1));
      loss_sum += lg.loss;
    }
    report.epoch_mean_loss.push_back(loss_sum / steps);

    const int done = epoch + 1;
    if (on_checkpoint && ((cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) ||
                          done == cfg.epochs))
      on_checkpoint(done, params);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(params), std::move(report)};
}

PipelineResult pretrain_then_finetune(const SignalDataset& data, const Schedule& schedule,
                                      const Architecture& arch, const CIConfig& ci,
                                      const PipelineSeeds& seeds, TrainConfig cfg_pre,
                                      TrainConfig cfg_fine) {
  if (cfg_pre.ci) throw InvalidArgument("pretrain_then_finetune: pretraining must be uniform");
  ci.validate();
  cfg_pre.seed = seeds.pretrain;
  cfg_fine.seed = seeds.finetune;
  cfg_fine.ci = ci;

  auto base = train(init_params(arch, seeds.init), data, schedule,
                    TimestepPMF::uniform(schedule.T()), cfg_pre);
  auto fine = train(base.params, data, schedule, TimestepPMF::from_ci(ci, schedule.T()), cfg_fine);
  return {std::move(base.params), std::move(fine.params), std::move(base.report),
          std::move(fine.report)};
}

}  // namespace dgate

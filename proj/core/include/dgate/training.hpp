// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dgate/data_io.hpp"
#include "dgate/denoiser.hpp"
#include "dgate/noise_schedule.hpp"
#include "dgate/timestep_distribution.hpp"

namespace dgate {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-4;
  // Absent means uniform timestep sampling.
  std::optional<CIConfig> ci;
  std::uint64_t seed = 0;
  // Invoke the checkpoint hook every this many epochs; 0 = only after the last.
  int checkpoint_every = 0;
  AdamSettings adam;

  void validate() const;
};

// Baseline protocol: uniform sampling, 50 epochs at 1e-3.
TrainConfig pretrain_config(std::uint64_t seed = 0);
// Memorization-control protocol: CI sampling, 30 epochs at 1e-4.
TrainConfig finetune_config(const CIConfig& ci, std::uint64_t seed = 0);

// The sampling distribution a config asks for.
TimestepPMF pmf_for(const TrainConfig& cfg, int T);

struct TrainReport {
  std::vector<double> epoch_mean_loss;
  // Timestep draw counts over the whole run, index t-1.
  std::vector<std::int64_t> timestep_histogram;
  int steps_per_epoch = 0;
  int batch_size = 0;
  double wall_seconds = 0.0;

  double final_loss() const { return epoch_mean_loss.empty() ? 0.0 : epoch_mean_loss.back(); }
};

struct TrainResult {
  DenoiserParams params;
  TrainReport report;
};

using CheckpointHook = std::function<void(int epochs_completed, const DenoiserParams&)>;

// Each epoch visits the dataset in a seeded shuffled order in
// ceil(N / batch_size) steps; the last step is topped up from the start of
// the same permutation so every step has exactly batch_size samples. Each
// sample gets its own timestep from `pmf` and its own standard-normal noise.
TrainResult train(DenoiserParams params, const SignalDataset& data, const Schedule& schedule,
                  const TimestepPMF& pmf, const TrainConfig& cfg,
                  const CheckpointHook& on_checkpoint = {});

struct PipelineSeeds {
  std::uint64_t init = 0;
  std::uint64_t pretrain = 1;
  std::uint64_t finetune = 2;
};

struct PipelineResult {
  DenoiserParams baseline;
  DenoiserParams finetuned;
  TrainReport pretrain_report;
  TrainReport finetune_report;
};

// Uniform-sampling baseline from fresh weights, then CI fine-tuning of that
// baseline. cfg_pre must not carry a CI; cfg_fine.ci is replaced by `ci`.
PipelineResult pretrain_then_finetune(const SignalDataset& data, const Schedule& schedule,
                                      const Architecture& arch, const CIConfig& ci,
                                      const PipelineSeeds& seeds, TrainConfig cfg_pre,
                                      TrainConfig cfg_fine);

}  // namespace dgate

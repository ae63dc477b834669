// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <gtest/gtest.h>

#include "dgate/error.hpp"

namespace dgate {
namespace {

SignalDataset small_synth(int n, int dim, std::uint64_t seed) {
  SynthOptions o;
  o.n = n;
  o.dim = dim;
  o.seed = seed;
  return synth_1d(o);
}

SignalDataset point_mass(const Eigen::VectorXd& x, int copies) {
  SignalDataset d;
  d.signals = x.replicate(1, copies);
  return d;
}

double total_variation(const std::vector<std::int64_t>& counts, std::span<const double> probs) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) tv += std::abs(counts[i] / n - probs[i]);
  return 0.5 * tv;
}

TEST(TrainConfig, Protocols) {
  const auto pre = pretrain_config(3);
  EXPECT_EQ(pre.epochs, 50);
  EXPECT_DOUBLE_EQ(pre.learning_rate, 1e-3);
  EXPECT_FALSE(pre.ci.has_value());
  EXPECT_EQ(pre.seed, 3u);
  const auto fine = finetune_config({700, 1000}, 4);
  EXPECT_EQ(fine.epochs, 30);
  EXPECT_DOUBLE_EQ(fine.learning_rate, 1e-4);
  ASSERT_TRUE(fine.ci.has_value());
  EXPECT_DOUBLE_EQ(fine.ci->lower, 700);
  EXPECT_EQ(TrainConfig{}.batch_size, 64);
  EXPECT_DOUBLE_EQ(TrainConfig{}.adam.beta1, 0.9);
  EXPECT_DOUBLE_EQ(TrainConfig{}.adam.beta2, 0.999);
  EXPECT_DOUBLE_EQ(TrainConfig{}.adam.epsilon, 1e-8);
}

TEST(TrainConfig, RejectsInvalid) {
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.learning_rate = -1e-3;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.learning_rate = std::nan("");
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.ci = CIConfig{500, 400};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Train, EpochsZeroRejected) {
  const auto data = small_synth(16, 4, 1);
  const auto schedule = Schedule::linear(20, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(init_params({4, 4, {8}}, 0), data, schedule, TimestepPMF::uniform(20), cfg),
               InvalidArgument);
}

TEST(Train, ZeroLearningRateLeavesParamsUnchanged) {
  const auto data = small_synth(40, 4, 1);
  const auto schedule = Schedule::linear(20, 1e-4, 0.02);
  const auto init = init_params({4, 4, {8}}, 0);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  cfg.batch_size = 16;
  const auto out = train(init, data, schedule, TimestepPMF::uniform(20), cfg);
  EXPECT_EQ(out.params, init);
  ASSERT_EQ(out.report.epoch_mean_loss.size(), 1u);
  EXPECT_GT(out.report.epoch_mean_loss[0], 0.0);
}

TEST(Train, BitIdenticalAcrossRuns) {
  const auto data = small_synth(50, 6, 2);
  const auto schedule = Schedule::linear(100, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.seed = 42;
  const auto a = train(init_params({6, 4, {8}}, 1), data, schedule, TimestepPMF::uniform(100), cfg);
  const auto b = train(init_params({6, 4, {8}}, 1), data, schedule, TimestepPMF::uniform(100), cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report.epoch_mean_loss, b.report.epoch_mean_loss);
  EXPECT_EQ(a.report.timestep_histogram, b.report.timestep_histogram);
  cfg.seed = 43;
  const auto c = train(init_params({6, 4, {8}}, 1), data, schedule, TimestepPMF::uniform(100), cfg);
  EXPECT_NE(a.params, c.params);
}

TEST(Train, HistogramTotalsAndReportShape) {
  const auto data = small_synth(50, 4, 2);  // 50 / 16 -> 4 steps, last one topped up
  const auto schedule = Schedule::linear(30, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  const auto out = train(init_params({4, 4, {8}}, 1), data, schedule, TimestepPMF::uniform(30), cfg);
  EXPECT_EQ(out.report.steps_per_epoch, 4);
  EXPECT_EQ(out.report.batch_size, 16);
  EXPECT_EQ(out.report.epoch_mean_loss.size(), 5u);
  EXPECT_EQ(out.report.timestep_histogram.size(), 30u);
  const auto total = std::accumulate(out.report.timestep_histogram.begin(),
                                     out.report.timestep_histogram.end(), std::int64_t{0});
  EXPECT_EQ(total, 5 * 4 * 16);
  EXPECT_GE(out.report.wall_seconds, 0.0);
  EXPECT_DOUBLE_EQ(out.report.final_loss(), out.report.epoch_mean_loss.back());
}

TEST(Train, HistogramConvergesToPmfAndCoversSupport) {
  const int T = 50;
  const auto schedule = Schedule::linear(T, 1e-4, 0.02);
  const auto data = small_synth(1000, 2, 3);
  const auto pmf = TimestepPMF::from_ci({35, 50}, T);
  TrainConfig cfg;
  cfg.epochs = 1000;
  cfg.batch_size = 1000;
  cfg.learning_rate = 1e-4;
  const auto out = train(init_params({2, 2, {2}}, 1), data, schedule, pmf, cfg);
  EXPECT_LT(total_variation(out.report.timestep_histogram, pmf.probs()), 0.01);
  for (int t = 1; t <= T; ++t) EXPECT_GT(out.report.timestep_histogram[t - 1], 0) << "t=" << t;
}

TEST(Train, PmfHorizonMustMatchSchedule) {
  const auto data = small_synth(8, 4, 1);
  EXPECT_THROW(train(init_params({4, 4, {8}}, 0), data, Schedule::linear(20, 1e-4, 0.02),
                     TimestepPMF::uniform(21), TrainConfig{}),
               InvalidArgument);
  EXPECT_THROW(train(init_params({5, 4, {8}}, 0), data, Schedule::linear(20, 1e-4, 0.02),
                     TimestepPMF::uniform(20), TrainConfig{}),
               InvalidArgument);
}

TEST(Train, DivergenceNamesTheStep) {
  const auto data = small_synth(32, 4, 1);
  const auto schedule = Schedule::linear(20, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.batch_size = 8;
  try {
    train(init_params({4, 4, {8}}, 0), data, schedule, TimestepPMF::uniform(20), cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step"), std::string::npos) << msg;
    EXPECT_EQ(e.kind(), "divergence");
  }
}

TEST(Train, CheckpointHookCadence) {
  const auto data = small_synth(16, 4, 1);
  const auto schedule = Schedule::linear(20, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.epochs = 7;
  cfg.batch_size = 8;
  cfg.checkpoint_every = 3;
  std::vector<int> seen;
  train(init_params({4, 4, {8}}, 0), data, schedule, TimestepPMF::uniform(20), cfg,
        [&](int done, const DenoiserParams&) { seen.push_back(done); });
  EXPECT_EQ(seen, (std::vector<int>{3, 6, 7}));
  cfg.checkpoint_every = 0;
  seen.clear();
  train(init_params({4, 4, {8}}, 0), data, schedule, TimestepPMF::uniform(20), cfg,
        [&](int done, const DenoiserParams&) { seen.push_back(done); });
  EXPECT_EQ(seen, (std::vector<int>{7}));
}

TEST(Train, SinglePointLossTrendsDown) {
  Eigen::VectorXd x(4);
  x << 1.0, -0.5, 0.25, 2.0;
  const auto data = point_mass(x, 4096);
  const auto schedule = Schedule::linear(100, 1e-4, 0.02);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 1024;
  cfg.learning_rate = 3e-3;
  const auto out = train(init_params({4, 8, {32}}, 2), data, schedule, TimestepPMF::uniform(100), cfg);
  const auto& loss = out.report.epoch_mean_loss;
  for (std::size_t e = 1; e < loss.size(); ++e)
    EXPECT_LE(loss[e], loss[e - 1] * 1.05) << "epoch " << e + 1;
  EXPECT_LT(loss.back(), 0.5 * loss.front());
}

TEST(Train, HighTimestepFocusReachesLowerLoss) {
  const auto data = small_synth(256, 16, 5);
  const auto schedule = Schedule::linear(1000, 1e-4, 0.02);
  const auto init = init_params({16, 16, {64}}, 3);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-3;
  const auto high = train(init, data, schedule, TimestepPMF::from_ci({900, 1000}, 1000), cfg);
  const auto low = train(init, data, schedule, TimestepPMF::from_ci({100, 200}, 1000), cfg);
  EXPECT_LT(high.report.final_loss(), low.report.final_loss());
}

TEST(Pipeline, FlatFinetuneHistogramWithinThreeStandardErrors) {
  const int T = 50;
  const auto schedule = Schedule::linear(T, 1e-4, 0.02);
  const auto data = small_synth(500, 2, 3);
  auto pre = pretrain_config();
  pre.epochs = 1;
  auto fine = finetune_config({0, static_cast<double>(T)});
  fine.epochs = 200;
  fine.batch_size = 500;
  // A vanishing z widens the interval's normal until the mixture is flat.
  const CIConfig wide{0, static_cast<double>(T), 1e-6};
  const auto out = pretrain_then_finetune(data, schedule, {2, 2, {2}}, wide, {}, pre, fine);
  const auto& h = out.finetune_report.timestep_histogram;
  const double n = static_cast<double>(std::accumulate(h.begin(), h.end(), std::int64_t{0}));
  const double p = 1.0 / T;
  const double se = std::sqrt(p * (1 - p) / n);
  for (int t = 1; t <= T; ++t) EXPECT_LT(std::abs(h[t - 1] / n - p), 3 * se) << "t=" << t;
}

TEST(Pipeline, HighIntervalFinetuneConcentratesDraws) {
  const int T = 1000;
  const auto schedule = Schedule::linear(T, 1e-4, 0.02);
  const auto data = small_synth(256, 4, 3);
  auto pre = pretrain_config();
  pre.epochs = 2;
  auto fine = finetune_config({0, 1});
  fine.epochs = 10;
  const auto out = pretrain_then_finetune(data, schedule, {4, 4, {8}}, {700, 1000}, {}, pre, fine);
  const auto& h = out.finetune_report.timestep_histogram;
  const double n = static_cast<double>(std::accumulate(h.begin(), h.end(), std::int64_t{0}));
  const auto pmf = TimestepPMF::from_ci({700, 1000}, T);
  double inside = 0.0, analytic = 0.0;
  for (int t = 700; t <= 1000; ++t) inside += h[t - 1], analytic += pmf.prob(t);
  // Half the normal's mass plus the floor's share of the interval.
  EXPECT_NEAR(analytic, 0.576696792618709, 1e-9);
  EXPECT_NEAR(inside / n, analytic, 3.0 * std::sqrt(analytic * (1 - analytic) / n));
  EXPECT_GT(inside / n, 0.5);
}

TEST(Pipeline, ReproducibleAndRejectsCiPretrain) {
  const auto schedule = Schedule::linear(100, 1e-4, 0.02);
  const auto data = small_synth(64, 4, 3);
  auto pre = pretrain_config();
  pre.epochs = 2;
  auto fine = finetune_config({0, 1});
  fine.epochs = 2;
  const auto a = pretrain_then_finetune(data, schedule, {4, 4, {8}}, {50, 90}, {}, pre, fine);
  const auto b = pretrain_then_finetune(data, schedule, {4, 4, {8}}, {50, 90}, {}, pre, fine);
  EXPECT_EQ(a.baseline, b.baseline);
  EXPECT_EQ(a.finetuned, b.finetuned);
  EXPECT_NE(a.baseline, a.finetuned);
  pre.ci = CIConfig{10, 20};
  EXPECT_THROW(pretrain_then_finetune(data, schedule, {4, 4, {8}}, {50, 90}, {}, pre, fine),
               InvalidArgument);
}

}  // namespace
}  // namespace dgate

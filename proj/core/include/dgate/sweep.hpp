// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgate/data_io.hpp"
#include "dgate/denoiser.hpp"
#include "dgate/generation.hpp"
#include "dgate/metrics.hpp"
#include "dgate/noise_schedule.hpp"
#include "dgate/training.hpp"

namespace dgate {

struct SweepGrid {
  std::vector<double> bounds;
  std::vector<std::pair<double, double>> pairs;  // every c_l < c_h, row-major over bounds
  double z = kDefaultZ;
};

// bounds must be strictly increasing and inside [0, T].
SweepGrid build_grid(const std::vector<double>& bounds, double z, int T);
// {T/10, 2T/10, ..., T}.
std::vector<double> default_bounds(int T);

enum class DistanceColumn { kMeanL2, kJsRaw };

struct SweepConfig {
  TrainConfig finetune = finetune_config(CIConfig{0.0, 1.0, kDefaultZ});  // ci set per cell
  GenerationConfig generation;
  EvalOptions eval;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::uint64_t base_seed = 0;
  int jobs = 1;
  DistanceColumn distance = DistanceColumn::kMeanL2;
};

struct SweepRow {
  double c_l = 0.0;
  double c_h = 0.0;
  std::uint64_t seed = 0;       // replicate id from SweepConfig::seeds
  std::uint64_t cell_seed = 0;  // derived stream seed
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
  EvalReport eval;

  double mean_location() const { return 0.5 * (c_l + c_h); }
  double width() const { return c_h - c_l; }
};

struct SweepFailure {
  double c_l = 0.0;
  double c_h = 0.0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order, then seed order
  std::vector<SweepFailure> failures;
  DistanceColumn distance = DistanceColumn::kMeanL2;
  // Absent when fewer than 3 rows or a constant column.
  std::optional<CorrelationResult> mean_location_corr;
  std::optional<CorrelationResult> width_corr;

  double distance_of(const SweepRow& row) const;
};

// Stream seed for one cell; independent of which other cells exist.
std::uint64_t cell_seed(std::uint64_t base_seed, double c_l, double c_h, std::uint64_t replicate);

// Fine-tunes a copy of `baseline` for every (pair, seed), generates, evaluates
// against `data`, and correlates the chosen distance with mean location and
// width. Cells run on cfg.jobs threads; rows are merged in grid order.
// Throws if more than 10% of cells fail.
SweepResult run_sweep(const SweepGrid& grid, const SignalDataset& data,
                      const DenoiserParams& baseline, const Schedule& schedule,
                      const SweepConfig& cfg);

// Recomputes the two correlations over the rows of `result`.
void compute_correlations(SweepResult& result);

struct WidthLossRow {
  double mean_location = 0.0;
  double c_l = 0.0;
  double c_h = 0.0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
};

// Final losses grouped by CI width; each group ordered by mean location.
std::map<double, std::vector<WidthLossRow>> loss_by_width_report(const SweepResult& result);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_correlation_csv(std::ostream& out, const SweepResult& result);
void write_loss_by_width_csv(std::ostream& out,
                             const std::map<double, std::vector<WidthLossRow>>& table);

}  // namespace dgate

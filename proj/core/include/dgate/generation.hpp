// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "dgate/denoiser.hpp"
#include "dgate/noise_schedule.hpp"

namespace dgate {

struct GenerationConfig {
  int num_samples = 1000;
  std::uint64_t seed = 0;
  // Clamp applied to the final output only.
  std::optional<std::pair<double, double>> clip_range;

  void validate() const;
};

// Full T-step DDPM ancestral sampling with posterior variance beta_t.
// Sample i draws all of its noise from its own stream derived from
// (seed, i), so results do not depend on num_samples or batching.
// Returns D x num_samples.
Eigen::MatrixXd ddpm_sample(const DenoiserParams& params, const Schedule& schedule,
                            const GenerationConfig& cfg);

}  // namespace dgate

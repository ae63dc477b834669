// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "dgate/noise_schedule.hpp"
#include "dgate/timestep_distribution.hpp"

namespace dgate {

// Per-timestep learning-signal proxy p(t) * SNR(t), split at an SNR threshold.
struct ContributionProfile {
  int T = 0;
  std::vector<double> contributions;
  double total = 0.0;
  double high_region_mass = 0.0;  // SNR(t) >= tau
  double low_region_mass = 0.0;   // SNR(t) < tau
  double tau = 1.0;
};

inline constexpr double kDefaultTau = 1.0;

double contribution(const TimestepPMF& pmf, const Schedule& schedule, Timestep t);

// d/dmu of N(t; mu, sigma) * SNR(t) using the untruncated density.
double contribution_dmu(const NormalParams& params, const Schedule& schedule, Timestep t);

// Same derivative for the truncated-and-mixed pmf actually used in training,
// by central differences on the bin masses. Diagnostic only.
double truncated_contribution_dmu(const NormalParams& params, const Schedule& schedule,
                                  Timestep t, double step = 1e-4);

double total_gradient_proxy(const TimestepPMF& pmf, const Schedule& schedule);

ContributionProfile region_split(const TimestepPMF& pmf, const Schedule& schedule,
                                 double tau = kDefaultTau);

}  // namespace dgate

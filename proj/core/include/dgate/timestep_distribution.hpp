// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dgate/noise_schedule.hpp"
#include "dgate/random.hpp"

namespace dgate {

// Standard-normal quantile for a central 50% interval.
inline constexpr double kDefaultZ = 0.67449;

// Confidence interval [lower, upper] on the timestep axis that should carry
// the central coverage of the sampling normal; z is the matching quantile.
struct CIConfig {
  double lower = 0.0;
  double upper = 0.0;
  double z = kDefaultZ;

  void validate() const;
};

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

NormalParams ci_to_params(const CIConfig& ci);

// Standard normal CDF. Throws InvalidArgument on non-finite input.
double normal_cdf(double x);
// Phi(b) - Phi(a) for a <= b, evaluated on whichever side of zero keeps
// full relative precision.
double normal_interval_mass(double a, double b);
double normal_pdf(double x, double mu, double sigma);

// Normal mass outside [0, T].
double tail_mass(const NormalParams& params, int T);

// Discrete sampling distribution over {1, ..., T}: a normal truncated to
// [0, T] and binned over unit intervals [t-1, t], mixed with a uniform floor
// that receives exactly the tail mass.
class TimestepPMF {
 public:
  static TimestepPMF build(const NormalParams& params, int T);
  static TimestepPMF from_ci(const CIConfig& ci, int T) { return build(ci_to_params(ci), T); }
  static TimestepPMF uniform(int T);

  int T() const noexcept { return static_cast<int>(probs_.size()); }
  double prob(Timestep t) const;
  std::span<const double> probs() const noexcept { return probs_; }
  std::span<const double> cdf() const noexcept { return cdf_; }
  // Weight on the truncated normal component.
  double lambda() const noexcept { return lambda_; }
  double tail_mass() const noexcept { return tail_mass_; }
  // Absent for the plain uniform distribution.
  const std::optional<NormalParams>& params() const noexcept { return params_; }
  // Truncated-normal bin masses before mixing (empty for uniform).
  std::span<const double> truncated_masses() const noexcept { return truncated_; }

  // Inverse-transform draw over the cumulative table.
  Timestep sample(Rng& rng) const;

 private:
  TimestepPMF() = default;
  void finish_cdf();

  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::vector<double> truncated_;
  double lambda_ = 0.0;
  double tail_mass_ = 1.0;
  std::optional<NormalParams> params_;
};

}  // namespace dgate

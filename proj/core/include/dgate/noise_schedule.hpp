// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dgate {

// Diffusion step index in {1, ..., T}.
using Timestep = int;

// DDPM forward-process schedule. All arrays are indexed 0..T-1 internally and
// addressed by 1-based timesteps through the accessors. Immutable once built.
class Schedule {
 public:
  // Linear beta schedule from beta_start (t = 1) to beta_end (t = T).
  static Schedule linear(int T, double beta_start, double beta_end);
  // Arbitrary betas, each in (0, 1).
  static Schedule from_betas(std::vector<double> betas);

  int T() const noexcept { return static_cast<int>(betas_.size()); }

  double beta(Timestep t) const { return betas_[index(t)]; }
  double alpha_bar(Timestep t) const { return alpha_bars_[index(t)]; }
  // sqrt(alpha_bar), the coefficient on x0 in x_t.
  double signal_coef(Timestep t) const { return signal_coefs_[index(t)]; }
  // sqrt(1 - alpha_bar), the coefficient on eps in x_t.
  double sigma(Timestep t) const { return sigmas_[index(t)]; }
  double snr(Timestep t) const { return snrs_[index(t)]; }

  std::span<const double> betas() const noexcept { return betas_; }
  std::span<const double> alpha_bars() const noexcept { return alpha_bars_; }
  std::span<const double> signal_coefs() const noexcept { return signal_coefs_; }
  std::span<const double> sigmas() const noexcept { return sigmas_; }
  std::span<const double> snrs() const noexcept { return snrs_; }

  // FNV-1a over T and the raw beta bytes; identifies a schedule in checkpoints.
  std::uint64_t fingerprint() const noexcept;

 private:
  Schedule() = default;
  std::size_t index(Timestep t) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
  std::vector<double> signal_coefs_;
  std::vector<double> sigmas_;
  std::vector<double> snrs_;
};

// signal_coef(t) * x0 + sigma(t) * eps, elementwise.
std::vector<double> forward_diffuse(const Schedule& schedule, std::span<const double> x0,
                                    Timestep t, std::span<const double> eps);

}  // namespace dgate

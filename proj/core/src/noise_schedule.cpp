// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/noise_schedule.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "dgate/error.hpp"

namespace dgate {

Schedule Schedule::linear(int T, double beta_start, double beta_end) {
  if (T < 1) throw InvalidArgument("schedule: T must be >= 1, got " + std::to_string(T));
  if (!std::isfinite(beta_start) || !std::isfinite(beta_end))
    throw InvalidArgument("schedule: beta bounds must be finite");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw InvalidArgument("schedule: require 0 < beta_start <= beta_end < 1");

  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int i = 0; i < T; ++i) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(i) / (T - 1);
    betas[i] = beta_start + (beta_end - beta_start) * frac;
  }
  return from_betas(std::move(betas));
}

Schedule Schedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw InvalidArgument("schedule: T must be >= 1, got 0");
  for (double b : betas) {
    if (!std::isfinite(b) || !(b > 0.0) || !(b < 1.0))
      throw InvalidArgument("schedule: every beta must lie in (0, 1)");
  }

  Schedule s;
  const std::size_t n = betas.size();
  s.alpha_bars_.resize(n);
  s.signal_coefs_.resize(n);
  s.sigmas_.resize(n);
  s.snrs_.resize(n);

  double alpha_bar = 1.0;
  double log_alpha_bar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    alpha_bar *= 1.0 - betas[i];
    log_alpha_bar += std::log1p(-betas[i]);
    // 1 - alpha_bar without cancellation near t = 1.
    const double noise_var = -std::expm1(log_alpha_bar);
    s.alpha_bars_[i] = alpha_bar;
    s.signal_coefs_[i] = std::sqrt(alpha_bar);
    s.sigmas_[i] = std::sqrt(noise_var);
    s.snrs_[i] = alpha_bar / noise_var;
  }
  s.betas_ = std::move(betas);
  return s;
}

std::size_t Schedule::index(Timestep t) const {
  if (t < 1 || t > T())
    throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " +
                          std::to_string(T()) + "]");
  return static_cast<std::size_t>(t - 1);
}

std::uint64_t Schedule::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t t = betas_.size();
  feed(&t, sizeof t);
  feed(betas_.data(), betas_.size() * sizeof(double));
  return h;
}

std::vector<double> forward_diffuse(const Schedule& schedule, std::span<const double> x0,
                                    Timestep t, std::span<const double> eps) {
  if (x0.size() != eps.size())
    throw InvalidArgument("forward_diffuse: x0 has length " + std::to_string(x0.size()) +
                          " but eps has length " + std::to_string(eps.size()));
  const double a = schedule.signal_coef(t);
  const double s = schedule.sigma(t);
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + s * eps[i];
  return out;
}

}  // namespace dgate

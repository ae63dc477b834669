// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/generation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

constexpr int kChunk = 256;

}  // namespace

void GenerationConfig::validate() const {
  if (num_samples < 1) throw InvalidArgument("generation: num_samples must be >= 1");
  if (clip_range && !(clip_range->first < clip_range->second))
    throw InvalidArgument("generation: clip range requires lo < hi");
}

Eigen::MatrixXd ddpm_sample(const DenoiserParams& params, const Schedule& schedule,
                            const GenerationConfig& cfg) {
  cfg.validate();
  const int D = params.arch.input_dim;
  const int T = schedule.T();
  Eigen::MatrixXd out(D, cfg.num_samples);

  for (int first = 0; first < cfg.num_samples; first += kChunk) {
    const int n = std::min(kChunk, cfg.num_samples - first);
    std::vector<Rng> streams;
    std::vector<std::normal_distribution<double>> normals(static_cast<std::size_t>(n));
    streams.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      streams.emplace_back(derive_seed(cfg.seed, {static_cast<std::uint64_t>(first + j)}));

    Eigen::MatrixXd x(D, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < D; ++i) x(i, j) = normals[j](streams[j]);

    std::vector<Timestep> ts(static_cast<std::size_t>(n));
    for (Timestep t = T; t >= 1; --t) {
      std::fill(ts.begin(), ts.end(), t);
      const Eigen::MatrixXd eps = forward_batch(params, x, ts);
      const double beta = schedule.beta(t);
      const double eps_coef = beta / schedule.sigma(t);
      const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
      x = inv_sqrt_alpha * (x - eps_coef * eps);
      if (t > 1) {
        const double noise_scale = std::sqrt(beta);
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < D; ++i) x(i, j) += noise_scale * normals[j](streams[j]);
      }
      if (!x.allFinite())
        throw DivergenceError("sampling produced non-finite values at timestep " +
                              std::to_string(t));
    }
    if (cfg.clip_range) x = x.cwiseMax(cfg.clip_range->first).cwiseMin(cfg.clip_range->second);
    out.middleCols(first, n) = x;
  }
  return out;
}

}  // namespace dgate

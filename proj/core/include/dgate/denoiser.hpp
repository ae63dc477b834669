// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgate/noise_schedule.hpp"

namespace dgate {

// Layer widths of the concatenation MLP:
// (input_dim + embed_dim) -> hidden_dims... -> input_dim.
struct Architecture {
  int input_dim = 32;
  int embed_dim = 32;
  std::vector<int> hidden_dims{128, 128};

  void validate() const;
  int layer_count() const noexcept { return static_cast<int>(hidden_dims.size()) + 1; }
  // (fan_out, fan_in) of layer i.
  std::pair<int, int> layer_shape(int i) const;
  std::string describe() const;

  bool operator==(const Architecture&) const = default;
};

struct AffineLayer {
  Eigen::MatrixXd weight;  // fan_out x fan_in
  Eigen::VectorXd bias;    // fan_out

  bool operator==(const AffineLayer& other) const {
    return weight == other.weight && bias == other.bias;
  }
};

// Noise-prediction network eps_theta(x_t, t). SiLU between hidden layers, no
// activation on the output layer.
struct DenoiserParams {
  Architecture arch;
  std::vector<AffineLayer> layers;

  static DenoiserParams zeros(const Architecture& arch);
  std::size_t total_param_count() const noexcept;
  bool all_finite() const;
  bool operator==(const DenoiserParams&) const = default;
};

// Partials of the batch loss, shape-congruent with DenoiserParams::layers.
struct Gradients {
  std::vector<AffineLayer> layers;

  static Gradients zeros_like(const DenoiserParams& params);
  bool all_finite() const;
};

// Weights ~ N(0, 1/fan_in), biases zero.
DenoiserParams init_params(const Architecture& arch, std::uint64_t seed);

// Sinusoidal embedding: interleaved (sin(t w_k), cos(t w_k)) with
// w_k = exp(-k ln(10000) / (E/2 - 1)), k = 0..E/2-1.
Eigen::VectorXd time_embedding(Timestep t, int T, int embed_dim);

std::vector<double> forward(const DenoiserParams& params, std::span<const double> x_t,
                            Timestep t);
// Column-batched forward: x_t is D x B, one timestep per column.
Eigen::MatrixXd forward_batch(const DenoiserParams& params, const Eigen::MatrixXd& x_t,
                              std::span<const Timestep> t);

// Training examples as columns: clean signal, timestep, injected noise.
struct NoisedBatch {
  Eigen::MatrixXd x0;   // D x B
  std::vector<Timestep> t;
  Eigen::MatrixXd eps;  // D x B

  int size() const noexcept { return static_cast<int>(t.size()); }
};

struct LossAndGrads {
  double loss = 0.0;
  Gradients grads;
};

// loss = mean over the batch of ||eps - eps_theta(x_t, t)||^2 with
// x_t = forward_diffuse(x0, t, eps); grads are exact reverse-mode partials.
LossAndGrads loss_and_grads(const DenoiserParams& params, const NoisedBatch& batch,
                            const Schedule& schedule);
double loss_only(const DenoiserParams& params, const NoisedBatch& batch,
                 const Schedule& schedule);

}  // namespace dgate

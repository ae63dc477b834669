// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/denoiser.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void fill_embedding(Timestep t, int embed_dim, double* out) {
  const int half = embed_dim / 2;
  const double denom = half > 1 ? static_cast<double>(half - 1) : 1.0;
  for (int k = 0; k < half; ++k) {
    const double w = std::exp(-static_cast<double>(k) * std::log(10000.0) / denom);
    out[2 * k] = std::sin(t * w);
    out[2 * k + 1] = std::cos(t * w);
  }
}

Eigen::MatrixXd embed_columns(std::span<const Timestep> t, int embed_dim) {
  Eigen::MatrixXd out(embed_dim, static_cast<Eigen::Index>(t.size()));
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] < 1) throw InvalidArgument("forward: timestep must be >= 1");
    fill_embedding(t[j], embed_dim, out.col(static_cast<Eigen::Index>(j)).data());
  }
  return out;
}

// Builds x_t columns for a batch.
Eigen::MatrixXd diffuse_batch(const NoisedBatch& batch, const Schedule& schedule) {
  Eigen::MatrixXd x_t(batch.x0.rows(), batch.x0.cols());
  for (Eigen::Index j = 0; j < batch.x0.cols(); ++j) {
    const Timestep t = batch.t[static_cast<std::size_t>(j)];
    x_t.col(j) = schedule.signal_coef(t) * batch.x0.col(j) + schedule.sigma(t) * batch.eps.col(j);
  }
  return x_t;
}

void check_batch(const DenoiserParams& params, const NoisedBatch& batch) {
  if (batch.size() == 0) throw InvalidArgument("loss_and_grads: empty batch");
  const auto D = params.arch.input_dim;
  if (batch.x0.rows() != D || batch.eps.rows() != D || batch.x0.cols() != batch.size() ||
      batch.eps.cols() != batch.size())
    throw InvalidArgument("loss_and_grads: batch shapes do not match input_dim " +
                          std::to_string(D));
}

}  // namespace

void Architecture::validate() const {
  if (input_dim < 1) throw InvalidArgument("architecture: input_dim must be >= 1");
  if (embed_dim < 2 || embed_dim % 2 != 0)
    throw InvalidArgument("architecture: embed_dim must be even and >= 2");
  for (int h : hidden_dims)
    if (h < 1) throw InvalidArgument("architecture: hidden widths must be >= 1");
}

std::pair<int, int> Architecture::layer_shape(int i) const {
  const int n = static_cast<int>(hidden_dims.size());
  const int fan_in = i == 0 ? input_dim + embed_dim : hidden_dims[static_cast<std::size_t>(i - 1)];
  const int fan_out = i == n ? input_dim : hidden_dims[static_cast<std::size_t>(i)];
  return {fan_out, fan_in};
}

std::string Architecture::describe() const {
  std::ostringstream s;
  s << "D=" << input_dim << " E=" << embed_dim << " hidden=[";
  for (std::size_t i = 0; i < hidden_dims.size(); ++i) s << (i ? "," : "") << hidden_dims[i];
  s << "]";
  return s.str();
}

DenoiserParams DenoiserParams::zeros(const Architecture& arch) {
  arch.validate();
  DenoiserParams p;
  p.arch = arch;
  for (int i = 0; i < arch.layer_count(); ++i) {
    const auto [out, in] = arch.layer_shape(i);
    p.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
  return p;
}

std::size_t DenoiserParams::total_param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool DenoiserParams::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

Gradients Gradients::zeros_like(const DenoiserParams& params) {
  Gradients g;
  for (const auto& l : params.layers)
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

bool Gradients::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

DenoiserParams init_params(const Architecture& arch, std::uint64_t seed) {
  auto p = DenoiserParams::zeros(arch);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& layer : p.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k)
      layer.weight.data()[k] = scale * normal(rng);
  }
  return p;
}

Eigen::VectorXd time_embedding(Timestep t, int T, int embed_dim) {
  if (embed_dim < 2 || embed_dim % 2 != 0)
    throw InvalidArgument("time_embedding: embed_dim must be even and >= 2, got " +
                          std::to_string(embed_dim));
  if (t < 1 || t > T)
    throw InvalidArgument("time_embedding: timestep " + std::to_string(t) + " outside [1, " +
                          std::to_string(T) + "]");
  Eigen::VectorXd e(embed_dim);
  fill_embedding(t, embed_dim, e.data());
  return e;
}

Eigen::MatrixXd forward_batch(const DenoiserParams& params, const Eigen::MatrixXd& x_t,
                              std::span<const Timestep> t) {
  const auto& arch = params.arch;
  if (x_t.rows() != arch.input_dim || x_t.cols() != static_cast<Eigen::Index>(t.size()))
    throw InvalidArgument("forward: input is " + std::to_string(x_t.rows()) + "x" +
                          std::to_string(x_t.cols()) + ", expected " +
                          std::to_string(arch.input_dim) + " rows and one column per timestep");
  Eigen::MatrixXd h(arch.input_dim + arch.embed_dim, x_t.cols());
  h.topRows(arch.input_dim) = x_t;
  h.bottomRows(arch.embed_dim) = embed_columns(t, arch.embed_dim);

  const std::size_t last = params.layers.size() - 1;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& layer = params.layers[i];
    Eigen::MatrixXd z = layer.weight * h;
    z.colwise() += layer.bias;
    if (i == last) return z;
    h = z.unaryExpr([](double v) { return v * sigmoid(v); });
  }
  return h;  // unreachable: layers is never empty
}

std::vector<double> forward(const DenoiserParams& params, std::span<const double> x_t,
                            Timestep t) {
  if (static_cast<int>(x_t.size()) != params.arch.input_dim)
    throw InvalidArgument("forward: input has length " + std::to_string(x_t.size()) +
                          ", expected " + std::to_string(params.arch.input_dim));
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(x_t.data(), x_t.size());
  const Timestep ts[1] = {t};
  Eigen::MatrixXd out = forward_batch(params, x, ts);
  return {out.data(), out.data() + out.size()};
}

LossAndGrads loss_and_grads(const DenoiserParams& params, const NoisedBatch& batch,
                            const Schedule& schedule) {
  check_batch(params, batch);
  const auto& arch = params.arch;
  const std::size_t n_layers = params.layers.size();
  const double B = static_cast<double>(batch.size());

  // Forward pass, keeping layer inputs and pre-activations.
  std::vector<Eigen::MatrixXd> inputs(n_layers);
  std::vector<Eigen::MatrixXd> pre(n_layers);
  inputs[0].resize(arch.input_dim + arch.embed_dim, batch.size());
  inputs[0].topRows(arch.input_dim) = diffuse_batch(batch, schedule);
  for (int j = 0; j < batch.size(); ++j)
    inputs[0].col(j).tail(arch.embed_dim) =
        time_embedding(batch.t[static_cast<std::size_t>(j)], schedule.T(), arch.embed_dim);

  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto& layer = params.layers[i];
    pre[i] = layer.weight * inputs[i];
    pre[i].colwise() += layer.bias;
    if (i + 1 < n_layers) inputs[i + 1] = pre[i].unaryExpr([](double v) { return v * sigmoid(v); });
  }

  const Eigen::MatrixXd residual = pre.back() - batch.eps;
  LossAndGrads out;
  out.loss = residual.squaredNorm() / B;
  if (!std::isfinite(out.loss)) throw DivergenceError("loss is not finite");

  // Reverse pass.
  out.grads = Gradients::zeros_like(params);
  Eigen::MatrixXd delta = (2.0 / B) * residual;  // dL/d(pre-activation)
  for (std::size_t k = n_layers; k-- > 0;) {
    auto& g = out.grads.layers[k];
    g.weight.noalias() = delta * inputs[k].transpose();
    g.bias = delta.rowwise().sum();
    if (k == 0) break;
    Eigen::MatrixXd upstream = params.layers[k].weight.transpose() * delta;
    const auto& z = pre[k - 1];
    delta = upstream.binaryExpr(z, [](double u, double v) {
      const double s = sigmoid(v);
      return u * s * (1.0 + v * (1.0 - s));
    });
  }
  return out;
}

double loss_only(const DenoiserParams& params, const NoisedBatch& batch,
                 const Schedule& schedule) {
  check_batch(params, batch);
  const Eigen::MatrixXd pred = forward_batch(params, diffuse_batch(batch, schedule), batch.t);
  return (pred - batch.eps).squaredNorm() / static_cast<double>(batch.size());
}

}  // namespace dgate

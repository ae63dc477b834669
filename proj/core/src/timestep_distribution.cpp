// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/timestep_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "dgate/error.hpp"

namespace dgate {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

void CIConfig::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !std::isfinite(z))
    throw InvalidArgument("confidence interval: bounds and z must be finite");
  if (!(lower < upper)) {
    std::ostringstream msg;
    msg << "confidence interval: require c_l < c_h, got [" << lower << ", " << upper << "]";
    throw InvalidArgument(msg.str());
  }
  if (!(z > 0.0)) throw InvalidArgument("confidence interval: z must be positive");
}

NormalParams ci_to_params(const CIConfig& ci) {
  ci.validate();
  return {0.5 * (ci.lower + ci.upper), (ci.upper - ci.lower) / (2.0 * ci.z)};
}

double normal_cdf(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("normal_cdf: input must be finite");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_interval_mass(double a, double b) {
  if (b <= a) return 0.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  return 0.5 * (std::erf(b * kInvSqrt2) - std::erf(a * kInvSqrt2));
}

double normal_pdf(double x, double mu, double sigma) {
  const double u = (x - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double tail_mass(const NormalParams& params, int T) {
  const double lo = (0.0 - params.mu) / params.sigma;
  const double hi = (static_cast<double>(T) - params.mu) / params.sigma;
  // Phi(lo) + (1 - Phi(hi)), both as lower/upper tails.
  return 0.5 * std::erfc(-lo * kInvSqrt2) + 0.5 * std::erfc(hi * kInvSqrt2);
}

TimestepPMF TimestepPMF::build(const NormalParams& params, int T) {
  if (T < 1) throw InvalidArgument("timestep distribution: T must be >= 1");
  if (!std::isfinite(params.mu) || !std::isfinite(params.sigma) || !(params.sigma > 0.0))
    throw InvalidArgument("timestep distribution: need finite mu and sigma > 0");

  const double lo = (0.0 - params.mu) / params.sigma;
  const double hi = (static_cast<double>(T) - params.mu) / params.sigma;
  const double interior = normal_interval_mass(lo, hi);
  if (!(interior >= 1e-300)) {
    std::ostringstream msg;
    msg << "timestep distribution: normal(mu=" << params.mu << ", sigma=" << params.sigma
        << ") has no representable mass inside [0, " << T
        << "]; widen sigma or move mu into range";
    throw DegenerateDistribution(msg.str());
  }

  TimestepPMF pmf;
  pmf.params_ = params;
  pmf.tail_mass_ = dgate::tail_mass(params, T);
  pmf.lambda_ = 1.0 - pmf.tail_mass_;

  const auto n = static_cast<std::size_t>(T);
  pmf.truncated_.resize(n);
  pmf.probs_.resize(n);
  const double floor = (1.0 - pmf.lambda_) / T;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (static_cast<double>(i) - params.mu) / params.sigma;
    const double b = (static_cast<double>(i + 1) - params.mu) / params.sigma;
    pmf.truncated_[i] = normal_interval_mass(a, b) / interior;
    pmf.probs_[i] = pmf.lambda_ * pmf.truncated_[i] + floor;
  }
  pmf.finish_cdf();
  return pmf;
}

TimestepPMF TimestepPMF::uniform(int T) {
  if (T < 1) throw InvalidArgument("timestep distribution: T must be >= 1");
  TimestepPMF pmf;
  pmf.lambda_ = 0.0;
  pmf.tail_mass_ = 1.0;
  pmf.probs_.assign(static_cast<std::size_t>(T), 1.0 / T);
  pmf.finish_cdf();
  return pmf;
}

void TimestepPMF::finish_cdf() {
  cdf_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cdf_[i] = acc;
  }
}

double TimestepPMF::prob(Timestep t) const {
  if (t < 1 || t > T())
    throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " +
                          std::to_string(T()) + "]");
  return probs_[static_cast<std::size_t>(t - 1)];
}

Timestep TimestepPMF::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, cdf_.back());
  const double u = unit(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<Timestep>(it - cdf_.begin()) + 1;
}

}  // namespace dgate

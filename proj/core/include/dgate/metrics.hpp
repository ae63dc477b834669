// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dgate {

// Sets of signals are D x n matrices, one signal per column.

enum class L2Aggregation {
  kMean,  // average distance to the whole training set
  kMin,   // nearest training signal
};

// For each generated g: aggregate over training x of ||g - x|| / sqrt(D);
// returns the mean over generated signals.
double mean_l2(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& train,
               L2Aggregation aggregation = L2Aggregation::kMean);

struct PCAModel {
  Eigen::VectorXd mean;                // D
  Eigen::MatrixXd components;          // D x k, orthonormal columns
  Eigen::VectorXd explained_variance;  // k, nonincreasing
  int iterations = 0;                  // power iterations summed over components

  int k() const noexcept { return static_cast<int>(components.cols()); }
  // k x n scores of centered data.
  Eigen::MatrixXd project(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores) const;
};

struct PCAOptions {
  double angle_tolerance = 1e-10;
  int max_iterations = 10000;
};

// Top-k eigenvectors of the sample covariance by power iteration with
// deflation. Throws RankDeficiency if fewer than k directions carry variance.
PCAModel pca_fit(const Eigen::MatrixXd& train, int k, const PCAOptions& options = {});

// W1 between two empirical distributions.
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);
// The integral of |F_a - F_b| evaluated over merged breakpoints; valid for
// any sizes. wasserstein1_1d uses it when the sizes differ.
double wasserstein1_cdf_integral(std::span<const double> a, std::span<const double> b);

inline constexpr int kDefaultBins = 50;

// sqrt of the base-2 Jensen-Shannon divergence between equal-width
// histograms over the shared range of both samples. In [0, 1].
double js_distance(std::span<const double> a, std::span<const double> b, int bins = kDefaultBins);
// Per-dimension js_distance averaged over the D rows.
double js_distance_multidim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            int bins = kDefaultBins);

struct CorrelationResult {
  double r = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  int n = 0;
};

// Pearson r with a Fisher-z confidence interval at level 1 - alpha and a
// two-sided Student-t p-value on n - 2 degrees of freedom.
CorrelationResult pearson_with_ci(std::span<const double> x, std::span<const double> y,
                                  double alpha = 0.05);

struct EvalOptions {
  int pca_components = 2;
  int bins = kDefaultBins;
  L2Aggregation aggregation = L2Aggregation::kMean;
  bool include_js_raw = true;
};

struct EvalReport {
  double mean_l2 = 0.0;
  int pca_components = 0;
  std::vector<double> wasserstein_per_component;
  std::vector<double> js_per_component;
  std::optional<double> js_raw;
};

// PCA is fitted on `train` only; both sets are projected with that model.
EvalReport evaluate(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& train,
                    const EvalOptions& options = {});

}  // namespace dgate

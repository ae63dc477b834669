// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

void require_nonempty(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty() || b.empty()) throw InvalidArgument(std::string(what) + ": empty sample");
}

void require_same_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.cols() == 0 || b.cols() == 0) throw InvalidArgument(std::string(what) + ": empty set");
  if (a.rows() != b.rows())
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) +
                          " vs " + std::to_string(b.rows()) + ")");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

double kl_term(double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; }

}  // namespace

double mean_l2(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& train,
               L2Aggregation aggregation) {
  require_same_dim(generated, train, "mean_l2");
  const double norm = std::sqrt(static_cast<double>(generated.rows()));
  double total = 0.0;
  for (Eigen::Index g = 0; g < generated.cols(); ++g) {
    double agg = aggregation == L2Aggregation::kMin ? std::numeric_limits<double>::infinity() : 0.0;
    for (Eigen::Index x = 0; x < train.cols(); ++x) {
      const double d = (generated.col(g) - train.col(x)).norm() / norm;
      if (aggregation == L2Aggregation::kMin) {
        agg = std::min(agg, d);
      } else {
        agg += d;
      }
    }
    if (aggregation == L2Aggregation::kMean) agg /= static_cast<double>(train.cols());
    total += agg;
  }
  return total / static_cast<double>(generated.cols());
}

Eigen::MatrixXd PCAModel::project(const Eigen::MatrixXd& data) const {
  return components.transpose() * (data.colwise() - mean);
}

Eigen::MatrixXd PCAModel::reconstruct(const Eigen::MatrixXd& scores) const {
  return (components * scores).colwise() + mean;
}

PCAModel pca_fit(const Eigen::MatrixXd& train, int k, const PCAOptions& options) {
  const auto D = static_cast<int>(train.rows());
  const auto N = static_cast<int>(train.cols());
  if (k < 1 || k > D || k > N)
    throw InvalidArgument("pca_fit: need 1 <= k <= min(D, N); got k=" + std::to_string(k) +
                          ", D=" + std::to_string(D) + ", N=" + std::to_string(N));

  PCAModel model;
  model.mean = train.rowwise().mean();
  const Eigen::MatrixXd centered = train.colwise() - model.mean;
  const Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(std::max(N - 1, 1));
  const double scale = std::max(cov.trace(), std::numeric_limits<double>::min());

  model.components.resize(D, k);
  model.explained_variance.resize(k);
  Rng rng(0x9ca5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto deflate = [&](Eigen::VectorXd& v, int found) {
    // Two Gram-Schmidt passes keep the basis orthonormal to working precision.
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < found; ++j) v -= model.components.col(j).dot(v) * model.components.col(j);
  };

  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v(D);
    for (int i = 0; i < D; ++i) v[i] = normal(rng);
    deflate(v, c);
    v.normalize();

    for (int it = 0; it < options.max_iterations; ++it) {
      Eigen::VectorXd w = cov * v;
      deflate(w, c);
      const double len = w.norm();
      if (len <= 1e-12 * scale)
        throw RankDeficiency("pca_fit: requested " + std::to_string(k) +
                                 " components but the data has rank " + std::to_string(c),
                             c);
      w /= len;
      ++model.iterations;
      const double sin_angle = (w - w.dot(v) * v).norm();
      v = w;
      if (sin_angle < options.angle_tolerance) break;
    }
    // Sign convention: largest-magnitude coordinate positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    model.components.col(c) = v;
    model.explained_variance[c] = v.dot(cov * v);
    if (model.explained_variance[c] <= 1e-12 * scale)
      throw RankDeficiency("pca_fit: requested " + std::to_string(k) +
                               " components but the data has rank " + std::to_string(c),
                           c);
  }

  // Nearly tied eigenvalues can come out of order; sort descending.
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return model.explained_variance[a] > model.explained_variance[b];
  });
  const Eigen::MatrixXd comps = model.components;
  const Eigen::VectorXd vars = model.explained_variance;
  for (int c = 0; c < k; ++c) {
    model.components.col(c) = comps.col(order[static_cast<std::size_t>(c)]);
    model.explained_variance[c] = vars[order[static_cast<std::size_t>(c)]];
  }
  return model;
}

double wasserstein1_cdf_integral(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b, "wasserstein1_1d");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  std::vector<double> all;
  all.reserve(sa.size() + sb.size());
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(all));

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double x = all[i];
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    const double width = all[i + 1] - x;
    if (width > 0.0) total += std::abs(ia / na - ib / nb) * width;
  }
  return total;
}

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b, "wasserstein1_1d");
  if (a.size() != b.size()) return wasserstein1_cdf_integral(a, b);
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
  return total / static_cast<double>(sa.size());
}

double js_distance(std::span<const double> a, std::span<const double> b, int bins) {
  require_nonempty(a, b, "js_distance");
  if (bins < 2) throw InvalidArgument("js_distance: bins must be >= 2");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;  // every value identical: both land in one bin

  const double width = (hi - lo) / bins;
  auto histogram = [&](std::span<const double> v) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (double x : v) {
      auto idx = static_cast<int>((x - lo) / width);
      idx = std::clamp(idx, 0, bins - 1);
      h[static_cast<std::size_t>(idx)] += 1.0;
    }
    for (double& c : h) c /= static_cast<double>(v.size());
    return h;
  };
  const auto p = histogram(a);
  const auto q = histogram(b);
  double jsd = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    jsd += 0.5 * kl_term(p[i], m) + 0.5 * kl_term(q[i], m);
  }
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

double js_distance_multidim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int bins) {
  require_same_dim(a, b, "js_distance_multidim");
  double total = 0.0;
  for (Eigen::Index d = 0; d < a.rows(); ++d) {
    const Eigen::VectorXd ra = a.row(d).transpose();
    const Eigen::VectorXd rb = b.row(d).transpose();
    total += js_distance({ra.data(), static_cast<std::size_t>(ra.size())},
                         {rb.data(), static_cast<std::size_t>(rb.size())}, bins);
  }
  return total / static_cast<double>(a.rows());
}

CorrelationResult pearson_with_ci(std::span<const double> x, std::span<const double> y,
                                  double alpha) {
  if (x.size() != y.size())
    throw InvalidArgument("pearson_with_ci: x and y have different lengths");
  if (x.size() < 3) throw InvalidArgument("pearson_with_ci: need at least 3 pairs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("pearson_with_ci: alpha must be in (0, 1)");

  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw InvalidArgument("pearson_with_ci: zero variance input");

  CorrelationResult res;
  res.n = static_cast<int>(x.size());
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  if (std::abs(res.r) >= 1.0) {
    res.ci_low = res.ci_high = res.r;
    res.p_value = 0.0;
    return res;
  }
  if (res.n == 3) {
    res.ci_low = -1.0;
    res.ci_high = 1.0;
  } else {
    const boost::math::normal_distribution<double> std_normal;
    const double zc = boost::math::quantile(std_normal, 1.0 - alpha / 2.0);
    const double z = std::atanh(res.r);
    const double half = zc / std::sqrt(n - 3.0);
    res.ci_low = std::tanh(z - half);
    res.ci_high = std::tanh(z + half);
  }
  const double t = res.r * std::sqrt((n - 2.0) / (1.0 - res.r * res.r));
  const boost::math::students_t_distribution<double> student(n - 2.0);
  res.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(student, std::abs(t))));
  return res;
}

EvalReport evaluate(const Eigen::MatrixXd& generated, const Eigen::MatrixXd& train,
                    const EvalOptions& options) {
  require_same_dim(generated, train, "evaluate");
  EvalReport report;
  report.mean_l2 = mean_l2(generated, train, options.aggregation);
  report.pca_components = options.pca_components;
  if (options.pca_components > 0) {
    const auto pca = pca_fit(train, options.pca_components);
    const Eigen::MatrixXd gs = pca.project(generated);
    const Eigen::MatrixXd ts = pca.project(train);
    for (int c = 0; c < options.pca_components; ++c) {
      const Eigen::VectorXd g = gs.row(c).transpose();
      const Eigen::VectorXd t = ts.row(c).transpose();
      const std::span<const double> gspan(g.data(), static_cast<std::size_t>(g.size()));
      const std::span<const double> tspan(t.data(), static_cast<std::size_t>(t.size()));
      report.wasserstein_per_component.push_back(wasserstein1_1d(gspan, tspan));
      report.js_per_component.push_back(js_distance(gspan, tspan, options.bins));
    }
  }
  if (options.include_js_raw) report.js_raw = js_distance_multidim(generated, train, options.bins);
  return report;
}

}  // namespace dgate

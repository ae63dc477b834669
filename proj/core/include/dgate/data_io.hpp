// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dgate {

// Affine transform applied at load: normalized = (raw - shift) / scale.
struct Normalization {
  double shift = 0.0;
  double scale = 1.0;

  bool operator==(const Normalization&) const = default;
};

// A set of equal-length 1D signals stored column-wise (D x N).
struct SignalDataset {
  Eigen::MatrixXd signals;
  std::vector<int> labels;  // empty when the source had no label column
  Normalization normalization;

  int dim() const noexcept { return static_cast<int>(signals.rows()); }
  int size() const noexcept { return static_cast<int>(signals.cols()); }
  // Signals mapped back to the source units.
  Eigen::MatrixXd raw() const;
};

// Global (all values pooled) standardization to zero mean and unit variance.
// Constant data keeps scale 1.
Normalization fit_standardization(const Eigen::MatrixXd& signals);
void apply_normalization(Eigen::MatrixXd& signals, const Normalization& norm);

// Numeric rows separated by commas, tabs or whitespace; the delimiter is
// detected from the first non-empty line. With has_label_column the first
// column is an integer class label.
SignalDataset parse_delimited(std::istream& in, bool has_label_column, bool standardize = true);
SignalDataset load_delimited(const std::filesystem::path& path, bool has_label_column,
                             bool standardize = true);

struct SynthOptions {
  int n = 512;
  int dim = 32;
  int classes = 3;
  std::uint64_t seed = 0;
  double noise_scale = 0.1;
  bool standardize = true;
};

// Class templates are sums of 2-3 Gaussian bumps; each signal is its class
// template plus i.i.d. Gaussian noise. Signal i belongs to class i % classes.
SignalDataset synth_1d(const SynthOptions& opts);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// One row per column of `signals`.
void write_signals_csv(std::ostream& out, const Eigen::MatrixXd& signals);
void write_signals_csv(const std::filesystem::path& path, const Eigen::MatrixXd& signals);
// Reads a label-free CSV written by write_signals_csv, without normalization.
Eigen::MatrixXd read_signals_csv(const std::filesystem::path& path);

}  // namespace dgate

// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string_view>

#include "dgate/error.hpp"
#include "dgate/random.hpp"

namespace dgate {

namespace {

enum class Delimiter { kComma, kTab, kWhitespace };

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, Delimiter delim) {
  std::vector<std::string_view> cells;
  if (delim == Delimiter::kWhitespace) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) cells.push_back(line.substr(start, i - start));
    }
    return cells;
  }
  const char sep = delim == Delimiter::kComma ? ',' : '\t';
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

double parse_number(std::string_view cell, std::size_t line_no) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                     std::string(cell) + "'");
  return value;
}

}  // namespace

Eigen::MatrixXd SignalDataset::raw() const {
  return (signals.array() * normalization.scale + normalization.shift).matrix();
}

Normalization fit_standardization(const Eigen::MatrixXd& signals) {
  Normalization norm;
  if (signals.size() == 0) return norm;
  const double n = static_cast<double>(signals.size());
  norm.shift = signals.sum() / n;
  const double var = (signals.array() - norm.shift).square().sum() / n;
  norm.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  return norm;
}

void apply_normalization(Eigen::MatrixXd& signals, const Normalization& norm) {
  signals = ((signals.array() - norm.shift) / norm.scale).matrix();
}

SignalDataset parse_delimited(std::istream& in, bool has_label_column, bool standardize) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::optional<Delimiter> delim;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    if (!delim) {
      delim = line.find(',') != std::string::npos    ? Delimiter::kComma
              : line.find('\t') != std::string::npos ? Delimiter::kTab
                                                     : Delimiter::kWhitespace;
    }
    const auto cells = split(line, *delim);
    if (rows.empty()) {
      width = cells.size();
      if (width < (has_label_column ? 2u : 1u))
        throw ParseError("line " + std::to_string(line_no) + ": no signal columns");
    } else if (cells.size() != width) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(cells.size()));
    }
    std::size_t first = 0;
    if (has_label_column) {
      const double label = parse_number(cells[0], line_no);
      if (label != std::floor(label) || std::abs(label) > 1e9)
        throw ParseError("line " + std::to_string(line_no) + ": label '" +
                         std::string(cells[0]) + "' is not an integer");
      labels.push_back(static_cast<int>(label));
      first = 1;
    }
    std::vector<double> row;
    row.reserve(width - first);
    for (std::size_t c = first; c < cells.size(); ++c) row.push_back(parse_number(cells[c], line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("input contains no data rows");

  SignalDataset ds;
  const auto D = static_cast<Eigen::Index>(rows.front().size());
  ds.signals.resize(D, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (Eigen::Index i = 0; i < D; ++i) ds.signals(i, static_cast<Eigen::Index>(j)) = rows[j][i];
  ds.labels = std::move(labels);
  if (standardize) {
    ds.normalization = fit_standardization(ds.signals);
    apply_normalization(ds.signals, ds.normalization);
  }
  return ds;
}

SignalDataset load_delimited(const std::filesystem::path& path, bool has_label_column,
                             bool standardize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return parse_delimited(in, has_label_column, standardize);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

SignalDataset synth_1d(const SynthOptions& opts) {
  if (opts.n < 1 || opts.dim < 1 || opts.classes < 1)
    throw InvalidArgument("synth_1d: n, dim and classes must be >= 1");
  if (!(opts.noise_scale >= 0.0)) throw InvalidArgument("synth_1d: noise_scale must be >= 0");

  Rng rng(derive_seed(opts.seed, {0x73796e7468ULL}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double D = static_cast<double>(opts.dim);

  Eigen::MatrixXd templates = Eigen::MatrixXd::Zero(opts.dim, opts.classes);
  for (int c = 0; c < opts.classes; ++c) {
    const int bumps = 2 + static_cast<int>(unit(rng) < 0.5);
    for (int b = 0; b < bumps; ++b) {
      const double center = D * (0.1 + 0.8 * unit(rng));
      const double width = std::max(1.0, D * (1.0 / 20.0 + unit(rng) * (1.0 / 6.0 - 1.0 / 20.0)));
      const double amp = (0.5 + unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
      for (int i = 0; i < opts.dim; ++i) {
        const double u = (i - center) / width;
        templates(i, c) += amp * std::exp(-0.5 * u * u);
      }
    }
  }

  SignalDataset ds;
  ds.signals.resize(opts.dim, opts.n);
  ds.labels.resize(static_cast<std::size_t>(opts.n));
  for (int j = 0; j < opts.n; ++j) {
    const int c = j % opts.classes;
    ds.labels[static_cast<std::size_t>(j)] = c;
    for (int i = 0; i < opts.dim; ++i)
      ds.signals(i, j) = templates(i, c) + opts.noise_scale * normal(rng);
  }
  if (opts.standardize) {
    ds.normalization = fit_standardization(ds.signals);
    apply_normalization(ds.signals, ds.normalization);
  }
  return ds;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_signals_csv(std::ostream& out, const Eigen::MatrixXd& signals) {
  for (Eigen::Index j = 0; j < signals.cols(); ++j) {
    for (Eigen::Index i = 0; i < signals.rows(); ++i) {
      if (i) out << ',';
      out << format_double(signals(i, j));
    }
    out << '\n';
  }
}

void write_signals_csv(const std::filesystem::path& path, const Eigen::MatrixXd& signals) {
  if (signals.cols() == 0) throw InvalidArgument("write_signals_csv: no signals to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_signals_csv(out, signals);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Eigen::MatrixXd read_signals_csv(const std::filesystem::path& path) {
  return load_delimited(path, false, false).signals;
}

}  // namespace dgate

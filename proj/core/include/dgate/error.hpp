// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgate {

// Base class for every error raised by the library. kind() is a short stable
// token used by the CLI for its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

// Construction of a timestep distribution whose interior mass underflows.
class DegenerateDistribution : public Error {
 public:
  explicit DegenerateDistribution(const std::string& message)
      : Error("degenerate_distribution", message) {}
};

// Non-finite loss or state during training or sampling.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message)
      : Error("divergence", message) {}
};

class RankDeficiency : public Error {
 public:
  RankDeficiency(const std::string& message, int achievable_rank)
      : Error("rank_deficiency", message), achievable_rank_(achievable_rank) {}

  int achievable_rank() const noexcept { return achievable_rank_; }

 private:
  int achievable_rank_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error("parse", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class CheckpointError : public Error {
 public:
  enum class Reason { kBadMagic, kVersionMismatch, kChecksum, kShapeMismatch, kTruncated };

  CheckpointError(Reason reason, const std::string& message)
      : Error(kind_for(reason), message), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  static std::string kind_for(Reason reason) {
    switch (reason) {
      case Reason::kBadMagic: return "checkpoint_bad_magic";
      case Reason::kVersionMismatch: return "checkpoint_version";
      case Reason::kChecksum: return "checkpoint_checksum";
      case Reason::kShapeMismatch: return "checkpoint_shape";
      case Reason::kTruncated: return "checkpoint_truncated";
    }
    return "checkpoint";
  }

  Reason reason_;
};

}  // namespace dgate

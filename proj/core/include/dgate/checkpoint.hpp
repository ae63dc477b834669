// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgate/data_io.hpp"
#include "dgate/denoiser.hpp"
#include "dgate/timestep_distribution.hpp"

namespace dgate {

inline constexpr char kCheckpointMagic[8] = {'D', 'G', 'A', 'T', 'E', 'C', 'K', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Provenance {
  std::uint64_t schedule_fingerprint = 0;
  std::optional<CIConfig> ci;
  std::uint64_t seed = 0;
  std::uint32_t epochs_completed = 0;
  Normalization normalization;

  bool operator==(const Provenance& other) const;
};

struct Checkpoint {
  DenoiserParams params;
  Provenance provenance;
};

// Little-endian container:
//   magic[8] | u32 version | architecture | provenance |
//   u32 tensor_count | tensors... | u64 FNV-1a of all preceding bytes
// architecture = u32 D | u32 E | u32 n_hidden | u32 hidden[n_hidden]
// provenance   = u64 schedule | u8 has_ci | f64 c_l | f64 c_h | f64 z |
//                u64 seed | u32 epochs | f64 shift | f64 scale
// tensor       = u32 name_len | name | u32 rank | u32 dims[rank] | f64 payload
// Weight payloads are row-major.
std::vector<unsigned char> serialize_checkpoint(const DenoiserParams& params,
                                                const Provenance& provenance);
Checkpoint deserialize_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const Provenance& provenance);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Also rejects a checkpoint whose architecture differs from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const Architecture& expected);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len);

}  // namespace dgate

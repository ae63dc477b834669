// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#include "dgate/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dgate/error.hpp"

namespace dgate {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + len);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t len) : data_(data), len_(len) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t len) {
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == len_; }

 private:
  void need(std::size_t n) const {
    if (len_ - pos_ < n)
      throw CheckpointError(CheckpointError::Reason::kTruncated, "checkpoint: unexpected end of data");
  }

  const unsigned char* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

std::string shape_text(const std::vector<std::uint32_t>& dims) {
  std::ostringstream s;
  s << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) s << (i ? "x" : "") << dims[i];
  s << ")";
  return s.str();
}

}  // namespace

bool Provenance::operator==(const Provenance& other) const {
  const bool same_ci = ci.has_value() == other.ci.has_value() &&
                       (!ci || (ci->lower == other.ci->lower && ci->upper == other.ci->upper &&
                                ci->z == other.ci->z));
  return same_ci && schedule_fingerprint == other.schedule_fingerprint && seed == other.seed &&
         epochs_completed == other.epochs_completed && normalization == other.normalization;
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<unsigned char> serialize_checkpoint(const DenoiserParams& params,
                                                const Provenance& provenance) {
  Writer w;
  w.put_bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.put<std::uint32_t>(kCheckpointVersion);

  const auto& arch = params.arch;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(arch.input_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(arch.embed_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(arch.hidden_dims.size()));
  for (int h : arch.hidden_dims) w.put<std::uint32_t>(static_cast<std::uint32_t>(h));

  w.put<std::uint64_t>(provenance.schedule_fingerprint);
  w.put<std::uint8_t>(provenance.ci ? 1 : 0);
  const CIConfig ci = provenance.ci.value_or(CIConfig{0.0, 0.0, 0.0});
  w.put<double>(ci.lower);
  w.put<double>(ci.upper);
  w.put<double>(ci.z);
  w.put<std::uint64_t>(provenance.seed);
  w.put<std::uint32_t>(provenance.epochs_completed);
  w.put<double>(provenance.normalization.shift);
  w.put<double>(provenance.normalization.scale);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(2 * params.layers.size()));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto& layer = params.layers[i];
    const std::string wname = "layer" + std::to_string(i) + ".weight";
    w.put<std::uint32_t>(static_cast<std::uint32_t>(wname.size()));
    w.put_bytes(wname.data(), wname.size());
    w.put<std::uint32_t>(2);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.put<double>(layer.weight(r, c));

    const std::string bname = "layer" + std::to_string(i) + ".bias";
    w.put<std::uint32_t>(static_cast<std::uint32_t>(bname.size()));
    w.put_bytes(bname.data(), bname.size());
    w.put<std::uint32_t>(1);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.bias.size()));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) w.put<double>(layer.bias[r]);
  }

  auto& bytes = w.bytes();
  const std::uint64_t sum = fnv1a64(bytes.data(), bytes.size());
  w.put<std::uint64_t>(sum);
  return std::move(bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof kCheckpointMagic ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw CheckpointError(CheckpointError::Reason::kBadMagic,
                          "checkpoint: bad magic (not a DGATECK1 file)");
  Reader header(bytes.data() + sizeof kCheckpointMagic, bytes.size() - sizeof kCheckpointMagic);
  const auto version = header.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(CheckpointError::Reason::kVersionMismatch,
                          "checkpoint: version " + std::to_string(version) +
                              " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  if (bytes.size() < sizeof kCheckpointMagic + 4 + 8)
    throw CheckpointError(CheckpointError::Reason::kTruncated, "checkpoint: file too short");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (fnv1a64(bytes.data(), body) != stored)
    throw CheckpointError(CheckpointError::Reason::kChecksum, "checkpoint: checksum mismatch");

  Reader r(bytes.data() + sizeof kCheckpointMagic + 4, body - sizeof kCheckpointMagic - 4);
  Architecture arch;
  arch.input_dim = static_cast<int>(r.get<std::uint32_t>());
  arch.embed_dim = static_cast<int>(r.get<std::uint32_t>());
  const auto n_hidden = r.get<std::uint32_t>();
  arch.hidden_dims.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i)
    arch.hidden_dims.push_back(static_cast<int>(r.get<std::uint32_t>()));
  try {
    arch.validate();
  } catch (const InvalidArgument& e) {
    throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                          std::string("checkpoint: invalid architecture: ") + e.what());
  }

  Checkpoint ck;
  auto& prov = ck.provenance;
  prov.schedule_fingerprint = r.get<std::uint64_t>();
  const bool has_ci = r.get<std::uint8_t>() != 0;
  CIConfig ci;
  ci.lower = r.get<double>();
  ci.upper = r.get<double>();
  ci.z = r.get<double>();
  if (has_ci) prov.ci = ci;
  prov.seed = r.get<std::uint64_t>();
  prov.epochs_completed = r.get<std::uint32_t>();
  prov.normalization.shift = r.get<double>();
  prov.normalization.scale = r.get<double>();

  ck.params = DenoiserParams::zeros(arch);
  const auto count = r.get<std::uint32_t>();
  if (count != 2 * ck.params.layers.size())
    throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                          "checkpoint: expected " + std::to_string(2 * ck.params.layers.size()) +
                              " tensors for " + arch.describe() + ", found " +
                              std::to_string(count));
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t layer_idx = k / 2;
    const bool is_weight = k % 2 == 0;
    const std::string expected_name =
        "layer" + std::to_string(layer_idx) + (is_weight ? ".weight" : ".bias");
    const std::string name = r.get_string(r.get<std::uint32_t>());
    if (name != expected_name)
      throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                            "checkpoint: expected tensor '" + expected_name + "', found '" +
                                name + "'");
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::uint32_t> dims;
    for (std::uint32_t d = 0; d < rank; ++d) dims.push_back(r.get<std::uint32_t>());

    auto& layer = ck.params.layers[layer_idx];
    std::vector<std::uint32_t> want;
    if (is_weight) {
      want = {static_cast<std::uint32_t>(layer.weight.rows()),
              static_cast<std::uint32_t>(layer.weight.cols())};
    } else {
      want = {static_cast<std::uint32_t>(layer.bias.size())};
    }
    if (dims != want)
      throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                            "checkpoint: tensor '" + name + "' has shape " + shape_text(dims) +
                                ", architecture requires " + shape_text(want));
    if (is_weight) {
      for (Eigen::Index row = 0; row < layer.weight.rows(); ++row)
        for (Eigen::Index col = 0; col < layer.weight.cols(); ++col)
          layer.weight(row, col) = r.get<double>();
    } else {
      for (Eigen::Index row = 0; row < layer.bias.size(); ++row) layer.bias[row] = r.get<double>();
    }
  }
  if (!r.done())
    throw CheckpointError(CheckpointError::Reason::kTruncated,
                          "checkpoint: trailing bytes after tensor records");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const Provenance& provenance) {
  const auto bytes = serialize_checkpoint(params, provenance);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const Architecture& expected) {
  auto ck = load_checkpoint(path);
  if (!(ck.params.arch == expected))
    throw CheckpointError(CheckpointError::Reason::kShapeMismatch,
                          "checkpoint: architecture " + ck.params.arch.describe() +
                              " does not match the run's " + expected.describe());
  return ck;
}

}  // namespace dgate

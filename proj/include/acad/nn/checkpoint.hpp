// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "acad/nn/layers.hpp"

namespace acad::nn {

inline constexpr const char* kStageContext = "context_pretrained";
inline constexpr const char* kStageDenoiser = "denoiser";

struct CheckpointMeta {
  std::string stage;
  std::uint64_t seed = 0;
  std::string variant;      // empty for stage-1 checkpoints
  std::string config_hash;  // run config hash
  std::uint64_t master_seed = 0;
  std::size_t epoch = 0;
};

struct StoredTensor {
  Shape shape;
  std::vector<double> values;
};

/// Parameters of one or more modules, each under its own prefix.
struct ModelCheckpoint {
  CheckpointMeta meta;
  std::map<std::string, std::string> fingerprints;  // prefix -> module fingerprint
  std::map<std::string, StoredTensor> tensors;      // "prefix/name" -> values

  bool has_module(const std::string& prefix) const { return fingerprints.count(prefix) > 0; }
};

using ModuleRef = std::pair<std::string, const Module*>;

ModelCheckpoint snapshot(const CheckpointMeta& meta, const std::vector<ModuleRef>& modules);
/// Binary container: magic, JSON header, then raw little-endian doubles.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                     const std::vector<ModuleRef>& modules);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);
/// Copies stored values into `m`; the module's fingerprint must match.
void restore(Module& m, const ModelCheckpoint& ckpt, const std::string& prefix);

}  // namespace acad::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acad/synth/mix_spec.hpp"
#include "acad/synth/render.hpp"

namespace acad::synth {

struct ManifestRecord {
  std::string pair_id;
  events::SceneLabel scene_class;
  std::string split;
  std::string noisy_path;  // relative to the manifest directory
  std::string clean_path;
  MixSpec mix_spec;
  std::uint64_t seed = 0;
  bool clipped = false;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory holding manifest.jsonl
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::vector<ManifestRecord> records;

  std::vector<const ManifestRecord*> split(const std::string& name) const;
  std::vector<events::SceneLabel> scenes() const;
  std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
};

/// One JSON object per line; keys in a fixed order so reruns are byte-identical.
std::string manifest_to_jsonl(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Renders every (split, scene, index) pair into `out_dir/audio/<split>/` and
/// writes `out_dir/manifest.jsonl`. Each pair draws from its own stream seeded
/// by (master seed, pair_id), so the parallel schedule cannot change output.
DatasetManifest generate_dataset(const SynthConfig& cfg, const events::ContextEventSets& sets,
                                 const Catalogs& catalogs, const std::filesystem::path& out_dir,
                                 const std::string& config_hash);

/// References in `manifest` to sources that are not in the catalog of the
/// record's own split. Empty when the split hygiene holds.
std::vector<std::string> split_hygiene_violations(const DatasetManifest& manifest, const Catalogs& catalogs);

}  // namespace acad::synth

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "acad/events/context_sets.hpp"

namespace acad::synth {

template <typename T>
struct Range {
  T lo;
  T hi;
  bool contains(T v) const { return v >= lo && v <= hi; }
};

struct SplitCounts {
  int train = 10000;
  int val = 3000;
  int test = 3000;
};

/// Mixing ranges and corpus sizes. Defaults are the full-scale values.
struct SynthConfig {
  int sample_rate = 22050;
  double clip_seconds = 10.0;
  Range<double> background_lufs{-15.0, -10.0};
  Range<int> event_classes{1, 3};
  Range<int> instances_per_class{1, 2};
  Range<double> event_seconds{0.5, 3.0};
  Range<double> snr_db{-5.0, 10.0};
  double fade_seconds = 0.01;
  int max_redraws = 32;
  SplitCounts per_scene;
  std::uint64_t seed = 0;

  std::size_t clip_samples() const;
  void validate() const;
};

inline const std::vector<std::string> kSplits{"train", "val", "test"};

struct SourceEntry {
  std::string ref;       // path as written in the catalog, relative to its directory
  double duration_s = 0;
};

/// Source material of one split: scene backgrounds and event recordings.
struct SplitCatalog {
  std::map<events::SceneLabel, std::vector<SourceEntry>> scenes;
  std::map<events::EventId, std::vector<SourceEntry>> events;
};

struct Catalogs {
  std::filesystem::path root;  // directory that refs are relative to
  std::map<std::string, SplitCatalog> splits;

  const SplitCatalog& split(const std::string& name) const;
  std::filesystem::path resolve(const std::string& ref) const { return root / ref; }
};

/// JSON {"splits": {split: {"scenes": {scene: [{path, duration_s}]},
///                          "events": {id: [{path, duration_s}]}}}}
Catalogs load_catalogs(const std::filesystem::path& path);
std::string catalogs_to_json(const Catalogs& catalogs);

struct EventPlacement {
  events::EventId event_class;
  std::string source;
  double start_s = 0;
  double dur_s = 0;
  double snr_db = 0;
};

struct MixSpec {
  events::SceneLabel scene_class;
  std::string background;
  double background_offset_s = 0;
  double background_lufs = 0;
  std::vector<EventPlacement> events;

  /// Checks every range invariant against `cfg` and OC membership against `oc`.
  void validate(const SynthConfig& cfg, const events::EventSet& oc) const;
};

nlohmann::ordered_json to_json(const MixSpec& spec);
MixSpec mix_spec_from_json(const nlohmann::json& j);

/// Draws one recipe. All draws are uniform over their configured ranges and
/// event classes come from OC(scene) only. Fully determined by the seed.
MixSpec sample_mix_spec(std::uint64_t rng_seed, const events::SceneLabel& scene,
                        const SplitCatalog& catalog, const events::ContextEventSets& sets,
                        const SynthConfig& cfg);

}  // namespace acad::synth

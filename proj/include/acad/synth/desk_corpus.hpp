// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace acad::synth {

/// A small, fully synthetic stand-in for the scene and event corpora. Each
/// scene's clean backgrounds contain its in-context events, and the other
/// scenes' event classes serve as its out-of-context noise, so the same
/// event class is kept in one scene and removed in another.
struct DeskCorpusOptions {
  int sample_rate = 4000;
  double clip_seconds = 2.0;
  std::size_t scenes = 2;  // 2 or 3
  std::size_t backgrounds_train = 24;
  std::size_t backgrounds_eval = 8;  // per val/test split
  std::size_t events_train = 10;     // per class
  std::size_t events_eval = 4;
  std::size_t pairs_train = 200;  // per scene, written into config.yaml
  std::size_t pairs_eval = 60;
  std::uint64_t seed = 7;
};

/// Synthesises one event of class `id` (see desk_event_classes()).
std::vector<double> synth_desk_event(const std::string& id, double seconds, int sample_rate, std::uint64_t seed);
/// Synthesises a clean background of scene `scene` including its in-context events.
std::vector<double> synth_desk_background(const std::string& scene, double seconds, int sample_rate,
                                          std::uint64_t seed);

std::vector<std::string> desk_scene_names(std::size_t scenes);
/// In-context event classes of a desk scene.
std::vector<std::string> desk_event_classes(const std::string& scene);

/// Writes ontology.json, activity.csv, judgments.csv, catalogs.json, the
/// source WAVs under sources/ and a desk-scale config.yaml into `dir`.
void make_desk_corpus(const std::filesystem::path& dir, const DeskCorpusOptions& opt);

}  // namespace acad::synth

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "acad/events/ontology.hpp"

namespace acad::events {

using SceneLabel = std::string;

/// Total active duration (seconds) per (scene, event class).
class EventActivityTable {
 public:
  void add(const SceneLabel& scene, const EventId& event, double seconds);

  std::vector<SceneLabel> scenes() const;
  bool has_scene(const SceneLabel& scene) const { return durations_.contains(scene); }
  const std::map<EventId, double>& durations(const SceneLabel& scene) const;
  const std::map<SceneLabel, std::map<EventId, double>>& all() const noexcept { return durations_; }

 private:
  std::map<SceneLabel, std::map<EventId, double>> durations_;
};

/// CSV with header `scene,event_id,active_seconds`.
EventActivityTable load_activity_csv(const std::filesystem::path& path);

/// Frame-level JSONL: one record per line with fields scene, event_id,
/// frame_index, active and optionally clip. Active labels of each
/// (scene, clip, frame) are pruned of co-active parents, then every surviving
/// label accrues `frame_seconds`.
EventActivityTable load_activity_jsonl(const std::filesystem::path& path, const Ontology& ont,
                                       double frame_seconds);

/// Active classes of `scene`, by decreasing total duration; ties by ascending id.
std::vector<EventId> rank_activity(const EventActivityTable& table, const SceneLabel& scene);

/// First k entries of the ranking (fewer if the scene has fewer active classes).
std::vector<EventId> top_k(const EventActivityTable& table, const SceneLabel& scene, std::size_t k);

}  // namespace acad::events

// SPDX-License-Identifier: Apache-2.0
#include "acad/events/activity.hpp"

#include <algorithm>
#include <json.hpp>
#include <sstream>
#include <tuple>

#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"

namespace acad::events {

void EventActivityTable::add(const SceneLabel& scene, const EventId& event, double seconds) {
  require(seconds >= 0.0, ErrorCode::InvalidArgument, "active duration must be >= 0");
  durations_[scene][event] += seconds;
}

std::vector<SceneLabel> EventActivityTable::scenes() const {
  std::vector<SceneLabel> out;
  for (const auto& [s, unused] : durations_) out.push_back(s);
  return out;
}

const std::map<EventId, double>& EventActivityTable::durations(const SceneLabel& scene) const {
  auto it = durations_.find(scene);
  if (it == durations_.end()) fail(ErrorCode::UnknownScene, "scene '" + scene + "' not in activity table");
  return it->second;
}

EventActivityTable load_activity_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  const auto scene_col = csv.column("scene");
  const auto event_col = csv.column("event_id");
  const auto secs_col = csv.column("active_seconds");
  EventActivityTable table;
  for (const auto& row : csv.rows) {
    double secs = 0.0;
    try {
      secs = std::stod(row[secs_col]);
    } catch (const std::exception&) {
      fail(ErrorCode::MalformedContainer, "bad active_seconds '" + row[secs_col] + "'");
    }
    table.add(row[scene_col], row[event_col], secs);
  }
  return table;
}

EventActivityTable load_activity_jsonl(const std::filesystem::path& path, const Ontology& ont,
                                       double frame_seconds) {
  require(frame_seconds > 0.0, ErrorCode::InvalidArgument, "frame duration must be positive");
  using FrameKey = std::tuple<SceneLabel, std::string, long long>;
  std::map<FrameKey, EventSet> frames;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
      const FrameKey key{rec.at("scene").get<std::string>(), rec.value("clip", std::string{}),
                         rec.at("frame_index").get<long long>()};
      auto& labels = frames[key];
      if (rec.at("active").get<bool>()) labels.insert(rec.at("event_id").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedContainer, std::string("activity JSONL: ") + e.what());
    }
  }

  EventActivityTable table;
  for (const auto& [key, labels] : frames) {
    const auto pruned = prune_coactive_parents({labels}, ont).front();
    for (const auto& id : pruned) table.add(std::get<0>(key), id, frame_seconds);
  }
  return table;
}

std::vector<EventId> rank_activity(const EventActivityTable& table, const SceneLabel& scene) {
  std::vector<std::pair<EventId, double>> entries;
  for (const auto& [id, secs] : table.durations(scene))
    if (secs > 0.0) entries.emplace_back(id, secs);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<EventId> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.first));
  return out;
}

std::vector<EventId> top_k(const EventActivityTable& table, const SceneLabel& scene, std::size_t k) {
  auto ranked = rank_activity(table, scene);
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace acad::events

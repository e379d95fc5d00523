// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acad/events/activity.hpp"
#include "acad/events/ontology.hpp"

namespace acad::events {

struct SceneEventSets {
  EventSet ic;
  EventSet oc;
};

/// In-context and out-of-context event classes per scene.
using ContextEventSets = std::map<SceneLabel, SceneEventSets>;

enum class Verdict { HighlySimilar, PartiallySimilar, Distinct };

struct Judgment {
  SceneLabel scene;
  EventId ic_event;      // k
  EventId oc_ancestor;   // p
  Verdict verdict;
};

using RefinementJudgments = std::vector<Judgment>;

inline constexpr std::size_t kDefaultTopK = 20;

/// Preliminary sets from the top-k most active classes of every scene:
///   IC(s) = topK(s) plus descendants
///   OC(s) = siblings of topK(s) plus descendants,
///           plus, for every other scene s', topK(s') and siblings of topK(s')
///           with descendants,
///           minus IC(s).
ContextEventSets build_preliminary_sets(const EventActivityTable& table, const Ontology& ont,
                                        std::size_t k = kDefaultTopK);

/// HighlySimilar removes p and its descendants from OC, PartiallySimilar
/// removes only p, Distinct leaves OC unchanged. Every judgment is validated
/// against the input sets before any is applied.
ContextEventSets apply_refinement(const ContextEventSets& sets, const RefinementJudgments& judgments,
                                  const Ontology& ont);

Verdict parse_verdict(const std::string& text);
std::string to_string(Verdict v);

/// CSV with header `scene,ic_id,oc_id,verdict`.
RefinementJudgments load_judgments_csv(const std::filesystem::path& path);

/// JSON object {scene: {"ic": [...], "oc": [...]}} with sorted ids.
std::string sets_to_json(const ContextEventSets& sets);
ContextEventSets sets_from_json(const std::string& text);
ContextEventSets load_sets(const std::filesystem::path& path);

}  // namespace acad::events

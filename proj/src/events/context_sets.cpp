// SPDX-License-Identifier: Apache-2.0
#include "acad/events/context_sets.hpp"

#include <algorithm>
#include <cctype>
#include <json.hpp>

#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"

namespace acad::events {

namespace {

// Siblings of every id in `ids`, each with its descendants.
EventSet sibling_closure(const EventSet& ids, const Ontology& ont) {
  EventSet out;
  for (const auto& id : ids) out.merge(ont.with_descendants(ont.siblings(id)));
  return out;
}

}  // namespace

ContextEventSets build_preliminary_sets(const EventActivityTable& table, const Ontology& ont,
                                        std::size_t k) {
  std::map<SceneLabel, EventSet> top;
  for (const auto& scene : table.scenes()) {
    const auto ranked = top_k(table, scene, k);
    if (ranked.empty()) fail(ErrorCode::EmptyScene, "scene '" + scene + "' has no active event class");
    for (const auto& id : ranked) ont.node(id);
    top[scene] = EventSet(ranked.begin(), ranked.end());
  }

  // Per scene: its own IC closure and the closure it contributes to others.
  std::map<SceneLabel, EventSet> ic, own_oc, exported;
  for (const auto& [scene, ids] : top) {
    ic[scene] = ont.with_descendants(ids);
    own_oc[scene] = sibling_closure(ids, ont);
    exported[scene] = ic[scene];
    exported[scene].insert(own_oc[scene].begin(), own_oc[scene].end());
  }

  ContextEventSets sets;
  for (const auto& [scene, ids] : top) {
    EventSet oc = own_oc[scene];
    for (const auto& [other, contribution] : exported)
      if (other != scene) oc.insert(contribution.begin(), contribution.end());
    for (const auto& id : ic[scene]) oc.erase(id);
    sets[scene] = SceneEventSets{ic[scene], std::move(oc)};
  }
  return sets;
}

ContextEventSets apply_refinement(const ContextEventSets& sets, const RefinementJudgments& judgments,
                                  const Ontology& ont) {
  for (const auto& j : judgments) {
    auto it = sets.find(j.scene);
    if (it == sets.end()) fail(ErrorCode::InvalidJudgmentTarget, "unknown scene '" + j.scene + "'");
    if (!ont.contains(j.ic_event) || !ont.contains(j.oc_ancestor))
      fail(ErrorCode::InvalidJudgmentTarget, "judgment references an id missing from the ontology");
    if (!it->second.ic.contains(j.ic_event))
      fail(ErrorCode::InvalidJudgmentTarget, "'" + j.ic_event + "' is not IC for '" + j.scene + "'");
    if (!it->second.oc.contains(j.oc_ancestor))
      fail(ErrorCode::InvalidJudgmentTarget,
           "'" + j.oc_ancestor + "' is not OC for '" + j.scene + "'");
    if (!ont.is_ancestor(j.oc_ancestor, j.ic_event))
      fail(ErrorCode::InvalidJudgmentTarget,
           "'" + j.oc_ancestor + "' is not an ancestor of '" + j.ic_event + "'");
  }

  ContextEventSets out = sets;
  for (const auto& j : judgments) {
    EventSet& oc = out.at(j.scene).oc;
    switch (j.verdict) {
      case Verdict::HighlySimilar:
        oc.erase(j.oc_ancestor);
        for (const auto& d : ont.descendants(j.oc_ancestor)) oc.erase(d);
        break;
      case Verdict::PartiallySimilar:
        oc.erase(j.oc_ancestor);
        break;
      case Verdict::Distinct:
        break;
    }
  }
  return out;
}

Verdict parse_verdict(const std::string& text) {
  std::string key;
  for (char c : text)
    if (c != '_' && c != '-' && c != ' ') key.push_back(static_cast<char>(std::tolower(c)));
  if (key == "highlysimilar") return Verdict::HighlySimilar;
  if (key == "partiallysimilar") return Verdict::PartiallySimilar;
  if (key == "distinct") return Verdict::Distinct;
  fail(ErrorCode::MalformedContainer, "unknown verdict '" + text + "'");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::HighlySimilar: return "HighlySimilar";
    case Verdict::PartiallySimilar: return "PartiallySimilar";
    case Verdict::Distinct: return "Distinct";
  }
  return "Distinct";
}

RefinementJudgments load_judgments_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  const auto scene = csv.column("scene");
  const auto ic = csv.column("ic_id");
  const auto oc = csv.column("oc_id");
  const auto verdict = csv.column("verdict");
  RefinementJudgments out;
  for (const auto& row : csv.rows)
    out.push_back(Judgment{row[scene], row[ic], row[oc], parse_verdict(row[verdict])});
  return out;
}

std::string sets_to_json(const ContextEventSets& sets) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [scene, s] : sets) {
    doc[scene]["ic"] = std::vector<std::string>(s.ic.begin(), s.ic.end());
    doc[scene]["oc"] = std::vector<std::string>(s.oc.begin(), s.oc.end());
  }
  return doc.dump(2) + "\n";
}

ContextEventSets sets_from_json(const std::string& text) {
  ContextEventSets sets;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& [scene, s] : doc.items()) {
      SceneEventSets entry;
      for (const auto& id : s.at("ic")) entry.ic.insert(id.get<std::string>());
      for (const auto& id : s.at("oc")) entry.oc.insert(id.get<std::string>());
      sets[scene] = std::move(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedContainer, std::string("context sets JSON: ") + e.what());
  }
  return sets;
}

ContextEventSets load_sets(const std::filesystem::path& path) {
  return sets_from_json(read_text_file(path));
}

}  // namespace acad::events

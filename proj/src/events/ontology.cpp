// SPDX-License-Identifier: Apache-2.0
#include "acad/events/ontology.hpp"

#include <fstream>
#include <iterator>
#include <json.hpp>

#include "acad/core/error.hpp"

namespace acad::events {

namespace {
enum class Mark { Unvisited, Active, Done };
}

Ontology::Ontology(std::map<EventId, OntologyNode> nodes) : nodes_(std::move(nodes)) {
  for (const auto& [id, node] : nodes_) {
    parents_[id];
    for (const auto& child : node.child_ids) {
      if (!nodes_.contains(child))
        fail(ErrorCode::DanglingChild, "node '" + id + "' lists unknown child '" + child + "'");
      parents_[child].insert(id);
    }
  }

  // Iterative DFS with three-colour marking to detect cycles.
  std::map<EventId, Mark> mark;
  for (const auto& [root, unused] : nodes_) {
    if (mark[root] != Mark::Unvisited) continue;
    std::vector<std::pair<const EventId*, std::size_t>> stack{{&root, 0}};
    mark[root] = Mark::Active;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& children = nodes_.at(*id).child_ids;
      if (next < children.size()) {
        const EventId& child = children[next++];
        const Mark m = mark[child];
        if (m == Mark::Active)
          fail(ErrorCode::CyclicOntology, "cycle through '" + *id + "' -> '" + child + "'");
        if (m == Mark::Unvisited) {
          mark[child] = Mark::Active;
          stack.emplace_back(&child, 0);
        }
      } else {
        mark[*id] = Mark::Done;
        stack.pop_back();
      }
    }
  }
}

void Ontology::check_known(const EventId& id) const {
  if (!nodes_.contains(id)) fail(ErrorCode::UnknownId, "unknown event id '" + id + "'");
}

const OntologyNode& Ontology::node(const EventId& id) const {
  check_known(id);
  return nodes_.at(id);
}

const EventSet& Ontology::parents(const EventId& id) const {
  check_known(id);
  return parents_.at(id);
}

EventSet Ontology::descendants(const EventId& id) const {
  check_known(id);
  EventSet out;
  std::vector<EventId> frontier = nodes_.at(id).child_ids;
  while (!frontier.empty()) {
    EventId cur = std::move(frontier.back());
    frontier.pop_back();
    if (!out.insert(cur).second) continue;
    for (const auto& c : nodes_.at(cur).child_ids) frontier.push_back(c);
  }
  return out;
}

EventSet Ontology::siblings(const EventId& id) const {
  check_known(id);
  EventSet out;
  for (const auto& parent : parents_.at(id))
    for (const auto& c : nodes_.at(parent).child_ids)
      if (c != id) out.insert(c);
  return out;
}

bool Ontology::is_ancestor(const EventId& ancestor, const EventId& id) const {
  check_known(id);
  return descendants(ancestor).contains(id);
}

EventSet Ontology::with_descendants(const EventSet& ids) const {
  EventSet out;
  for (const auto& id : ids) {
    out.insert(id);
    out.merge(descendants(id));
  }
  return out;
}

Ontology parse_ontology(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedContainer, std::string("ontology JSON: ") + e.what());
  }
  if (!doc.is_array()) fail(ErrorCode::MalformedContainer, "ontology must be a JSON list of nodes");
  std::map<EventId, OntologyNode> nodes;
  for (const auto& rec : doc) {
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string())
      fail(ErrorCode::MalformedContainer, "ontology record without a string id");
    OntologyNode node;
    node.name = rec.value("name", std::string{});
    if (rec.contains("child_ids"))
      for (const auto& c : rec["child_ids"]) node.child_ids.push_back(c.get<std::string>());
    const auto id = rec["id"].get<std::string>();
    if (!nodes.emplace(id, std::move(node)).second)
      fail(ErrorCode::MalformedContainer, "duplicate ontology id '" + id + "'");
  }
  return Ontology(std::move(nodes));
}

Ontology load_ontology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open ontology '" + path.string() + "'");
  return parse_ontology(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::vector<EventSet> prune_coactive_parents(const std::vector<EventSet>& frame_labels,
                                             const Ontology& ont) {
  std::vector<EventSet> out;
  out.reserve(frame_labels.size());
  for (const auto& frame : frame_labels) {
    EventSet cur = frame;
    for (const auto& id : cur) ont.node(id);
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto it = cur.begin(); it != cur.end();) {
        bool has_child = false;
        for (const auto& d : ont.descendants(*it)) {
          if (cur.contains(d)) {
            has_child = true;
            break;
          }
        }
        if (has_child) {
          it = cur.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    out.push_back(std::move(cur));
  }
  return out;
}

}  // namespace acad::events

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace acad::events {

using EventId = std::string;
using EventSet = std::set<EventId>;

struct OntologyNode {
  std::string name;
  std::vector<EventId> child_ids;
};

/// Event-class hierarchy. Construction validates that every child resolves
/// and that the graph is acyclic, so closures always terminate.
class Ontology {
 public:
  explicit Ontology(std::map<EventId, OntologyNode> nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(const EventId& id) const { return nodes_.contains(id); }
  const OntologyNode& node(const EventId& id) const;
  const std::map<EventId, OntologyNode>& nodes() const noexcept { return nodes_; }

  const EventSet& parents(const EventId& id) const;
  /// Transitive closure of children, excluding `id` itself.
  EventSet descendants(const EventId& id) const;
  /// Union over every parent of (parent's children minus `id`).
  EventSet siblings(const EventId& id) const;
  bool is_ancestor(const EventId& ancestor, const EventId& id) const;

  /// `ids` plus all of their descendants.
  EventSet with_descendants(const EventSet& ids) const;

 private:
  void check_known(const EventId& id) const;

  std::map<EventId, OntologyNode> nodes_;
  std::map<EventId, EventSet> parents_;
};

/// Loads the AudioSet-style JSON list of {id, name, child_ids} records.
Ontology load_ontology(const std::filesystem::path& path);
Ontology parse_ontology(const std::string& json_text);

/// Per frame, drops every label that has at least one descendant present in
/// the same frame; repeated until nothing changes.
std::vector<EventSet> prune_coactive_parents(const std::vector<EventSet>& frame_labels,
                                             const Ontology& ont);

}  // namespace acad::events

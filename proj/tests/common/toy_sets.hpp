// SPDX-License-Identifier: Apache-2.0
// Toy ontology fixtures and an independent set-algebra oracle for IC/OC
// construction. The oracle works on a reachability matrix, not on the
// library's traversal code.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "acad/events/activity.hpp"
#include "acad/events/context_sets.hpp"
#include "acad/events/ontology.hpp"

namespace acad::toy {

using Edges = std::vector<std::pair<std::string, std::string>>;  // parent -> child

/// 15 nodes; "horn" has two parents so the graph is a DAG, not a tree.
inline const Edges& toy_edges() {
  static const Edges e{
      {"sound", "animal"}, {"sound", "vehicle"}, {"sound", "music"},  {"animal", "bird"},
      {"animal", "dog"},   {"animal", "insect"}, {"bird", "crow"},    {"bird", "sparrow"},
      {"dog", "bark"},     {"vehicle", "car"},   {"vehicle", "train"}, {"car", "horn"},
      {"music", "guitar"}, {"music", "drum"},    {"music", "horn"},
  };
  return e;
}

inline std::vector<std::string> toy_nodes(const Edges& edges) {
  std::set<std::string> ids;
  for (const auto& [p, c] : edges) {
    ids.insert(p);
    ids.insert(c);
  }
  return {ids.begin(), ids.end()};
}

inline events::Ontology make_ontology(const Edges& edges) {
  std::map<events::EventId, events::OntologyNode> nodes;
  for (const auto& id : toy_nodes(edges)) nodes[id] = {id, {}};
  for (const auto& [p, c] : edges) nodes[p].child_ids.push_back(c);
  return events::Ontology(std::move(nodes));
}

/// Brute force: reach[a][b] is true when b is a strict descendant of a.
struct Oracle {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<bool>> child, reach;

  explicit Oracle(const Edges& edges) : ids(toy_nodes(edges)) {
    const auto n = ids.size();
    for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;
    child.assign(n, std::vector<bool>(n, false));
    for (const auto& [p, c] : edges) child[index[p]][index[c]] = true;
    reach = child;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  }

  std::set<std::string> descendants(const std::string& a) const {
    std::set<std::string> out;
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (reach[index.at(a)][j]) out.insert(ids[j]);
    return out;
  }

  std::set<std::string> siblings(const std::string& a) const {
    std::set<std::string> out;
    const auto ia = index.at(a);
    for (std::size_t p = 0; p < ids.size(); ++p)
      if (child[p][ia])
        for (std::size_t j = 0; j < ids.size(); ++j)
          if (child[p][j] && j != ia) out.insert(ids[j]);
    return out;
  }

  std::set<std::string> closure(const std::set<std::string>& s) const {
    std::set<std::string> out = s;
    for (const auto& a : s)
      for (const auto& d : descendants(a)) out.insert(d);
    return out;
  }

  std::set<std::string> sibling_closure(const std::set<std::string>& s) const {
    std::set<std::string> sib;
    for (const auto& a : s)
      for (const auto& b : siblings(a)) sib.insert(b);
    return closure(sib);
  }

  /// The set formula written out directly from the top-k lists.
  events::ContextEventSets build(const std::map<std::string, std::set<std::string>>& top) const {
    events::ContextEventSets out;
    for (const auto& [scene, t] : top) {
      const auto ic = closure(t);
      std::set<std::string> oc = sibling_closure(t);
      for (const auto& [other, u] : top) {
        if (other == scene) continue;
        for (const auto& x : closure(u)) oc.insert(x);
        for (const auto& x : sibling_closure(u)) oc.insert(x);
      }
      std::set<std::string> diff;
      for (const auto& x : oc)
        if (!ic.count(x)) diff.insert(x);
      out[scene] = {ic, diff};
    }
    return out;
  }

  events::ContextEventSets refine(events::ContextEventSets sets, const events::RefinementJudgments& js) const {
    for (const auto& j : js) {
      auto& oc = sets[j.scene].oc;
      if (j.verdict == events::Verdict::HighlySimilar) {
        std::set<std::string> drop = descendants(j.oc_ancestor);
        drop.insert(j.oc_ancestor);
        std::set<std::string> kept;
        for (const auto& x : oc)
          if (!drop.count(x)) kept.insert(x);
        oc = kept;
      } else if (j.verdict == events::Verdict::PartiallySimilar) {
        oc.erase(j.oc_ancestor);
      }
    }
    return sets;
  }
};

/// Two scenes over the 15-node toy ontology with a shared class ("dog").
inline events::EventActivityTable toy_activity() {
  events::EventActivityTable t;
  t.add("park", "bird", 100.0);
  t.add("park", "insect", 80.0);
  t.add("park", "dog", 50.0);
  t.add("park", "guitar", 10.0);
  t.add("street", "car", 120.0);
  t.add("street", "horn", 90.0);
  t.add("street", "dog", 60.0);
  t.add("street", "train", 30.0);
  t.add("street", "animal", 5.0);
  return t;
}

}  // namespace acad::toy

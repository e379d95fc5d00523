// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "../common/toy_sets.hpp"
#include "acad/core/csv.hpp"
#include "acad/events/activity.hpp"
#include "acad/events/context_sets.hpp"
#include "acad/events/ontology.hpp"
#include "test_support.hpp"

using namespace acad;
using namespace acad::events;
using acad::testing::code_of;

namespace {
Ontology animal_tree() {
  return parse_ontology(R"([{"id":"animal","name":"Animal","child_ids":["bird","dog"]},
                            {"id":"bird","name":"Bird","child_ids":["crow"]},
                            {"id":"crow","name":"Crow"},{"id":"dog","name":"Dog"}])");
}
}  // namespace

TEST_CASE("ontology loading and validation") {
  const auto o = parse_ontology(R"([{"id":"A","name":"a","child_ids":["B","C"]},{"id":"B","name":"b"},{"id":"C","name":"c"}])");
  CHECK(o.size() == 3);
  CHECK(o.parents("B") == EventSet{"A"});
  CHECK(o.descendants("A") == EventSet{"B", "C"});
  CHECK(code_of([] { parse_ontology(R"([{"id":"A","child_ids":["B"]},{"id":"B","child_ids":["A"]}])"); }) ==
        ErrorCode::CyclicOntology);
  CHECK(code_of([] { parse_ontology(R"([{"id":"A","child_ids":["Z"]}])"); }) == ErrorCode::DanglingChild);
  CHECK(code_of([&] { o.descendants("nope"); }) == ErrorCode::UnknownId);

  const auto dir = acad::testing::scratch_dir("ontology");
  std::ofstream(dir / "o.json") << R"([{"id":"A","name":"a","child_ids":["B"]},{"id":"B","name":"b"}])";
  CHECK(load_ontology(dir / "o.json").size() == 2);
}

TEST_CASE("descendants and siblings") {
  const auto o = animal_tree();
  CHECK(o.descendants("crow").empty());
  CHECK(o.descendants("animal") == EventSet{"bird", "crow", "dog"});
  CHECK(o.siblings("bird") == EventSet{"dog"});
  CHECK(o.siblings("animal").empty());
  CHECK(o.is_ancestor("animal", "crow"));
  CHECK_FALSE(o.is_ancestor("crow", "animal"));
}

TEST_CASE("co-active parent pruning") {
  const auto o = animal_tree();
  const auto pruned = prune_coactive_parents({{"animal", "bird", "dog"}, {"animal"}}, o);
  CHECK(pruned[0] == EventSet{"bird", "dog"});
  CHECK(pruned[1] == EventSet{"animal"});
  const auto chain = parse_ontology(R"([{"id":"A","child_ids":["B"]},{"id":"B","child_ids":["C"]},{"id":"C"}])");
  CHECK(prune_coactive_parents({{"A", "B", "C"}}, chain)[0] == EventSet{"C"});
  // Idempotence.
  const std::vector<EventSet> frames{{"animal", "crow"}, {"bird", "dog", "animal"}, {"crow", "bird"}};
  const auto once = prune_coactive_parents(frames, o);
  CHECK(prune_coactive_parents(once, o) == once);
  CHECK(code_of([&] { prune_coactive_parents({{"ghost"}}, o); }) == ErrorCode::UnknownId);
}

TEST_CASE("activity ranking") {
  EventActivityTable t;
  t.add("s", "a", 5.0);
  t.add("s", "b", 9.0);
  CHECK(rank_activity(t, "s") == std::vector<EventId>{"b", "a"});
  EventActivityTable tie;
  tie.add("s", "b", 5.0);
  tie.add("s", "a", 5.0);
  CHECK(rank_activity(tie, "s") == std::vector<EventId>{"a", "b"});
  CHECK(code_of([&] { rank_activity(t, "x"); }) == ErrorCode::UnknownScene);
  EventActivityTable many;
  for (int i = 0; i < 25; ++i) many.add("s", "e" + std::to_string(100 + i), static_cast<double>(i));
  const auto top = top_k(many, "s", 20);
  REQUIRE(top.size() == 20);
  CHECK(top.front() == "e124");
  CHECK(top.back() == "e105");
}

TEST_CASE("activity from frame tags prunes parents before accruing") {
  const auto o = animal_tree();
  const auto dir = acad::testing::scratch_dir("jsonl");
  std::ofstream(dir / "a.jsonl") << R"({"scene":"park","clip":"c1","event_id":"animal","frame_index":0,"active":true}
{"scene":"park","clip":"c1","event_id":"bird","frame_index":0,"active":true}
{"scene":"park","clip":"c1","event_id":"animal","frame_index":1,"active":true}
{"scene":"park","clip":"c1","event_id":"dog","frame_index":1,"active":false}
)";
  const auto t = load_activity_jsonl(dir / "a.jsonl", o, 0.5);
  CHECK(t.durations("park").at("bird") == 0.5);
  CHECK(t.durations("park").at("animal") == 0.5);
  CHECK_FALSE(t.durations("park").contains("dog"));

  std::ofstream(dir / "a.csv") << "scene,event_id,active_seconds\npark,bird,3.5\nstreet,dog,2\n";
  const auto c = load_activity_csv(dir / "a.csv");
  CHECK(c.scenes() == std::vector<SceneLabel>{"park", "street"});
  CHECK(c.durations("park").at("bird") == 3.5);
}

TEST_CASE("preliminary sets on small hand cases") {
  const auto o = animal_tree();
  EventActivityTable one;
  one.add("A", "bird", 10.0);
  const auto s1 = build_preliminary_sets(one, o, 20);
  CHECK(s1.at("A").ic == EventSet{"bird", "crow"});
  CHECK(s1.at("A").oc == EventSet{"dog"});

  const auto two = parse_ontology(R"([{"id":"r1","child_ids":["x"]},{"id":"x"},{"id":"r2","child_ids":["y"]},{"id":"y"}])");
  EventActivityTable t;
  t.add("S1", "x", 1.0);
  t.add("S2", "y", 1.0);
  const auto s2 = build_preliminary_sets(t, two, 20);
  CHECK(s2.at("S1").oc.contains("y"));
  CHECK(s2.at("S2").oc.contains("x"));

  EventActivityTable shared;
  shared.add("S1", "bird", 3.0);
  shared.add("S2", "bird", 2.0);
  shared.add("S2", "dog", 5.0);
  const auto s3 = build_preliminary_sets(shared, o, 20);
  CHECK_FALSE(s3.at("S2").oc.contains("bird"));
  CHECK_FALSE(s3.at("S1").oc.contains("bird"));
  CHECK(s3.at("S1").oc.contains("dog"));

  EventActivityTable empty;
  empty.add("S", "bird", 0.0);
  CHECK(code_of([&] { build_preliminary_sets(empty, o, 20); }) == ErrorCode::EmptyScene);
}

TEST_CASE("preliminary sets equal the brute-force oracle on the toy ontology") {
  const auto ont = toy::make_ontology(toy::toy_edges());
  const toy::Oracle oracle(toy::toy_edges());
  const auto table = toy::toy_activity();
  for (std::size_t k = 1; k <= 6; ++k) {
    std::map<std::string, std::set<std::string>> top;
    for (const auto& s : table.scenes()) {
      const auto t = top_k(table, s, k);
      top[s] = {t.begin(), t.end()};
    }
    const auto got = build_preliminary_sets(table, ont, k);
    const auto want = oracle.build(top);
    for (const auto& [scene, sets] : want) {
      CHECK(got.at(scene).ic == sets.ic);
      CHECK(got.at(scene).oc == sets.oc);
      for (const auto& id : got.at(scene).ic) CHECK_FALSE(got.at(scene).oc.contains(id));
    }
  }
  // Crossed context: some class is OC in one scene and IC in the other.
  const auto s = build_preliminary_sets(table, ont, 3);
  bool crossed = false;
  for (const auto& id : s.at("park").oc) crossed |= s.at("street").ic.contains(id);
  CHECK(crossed);
}

TEST_CASE("refinement verdicts") {
  const auto o = animal_tree();
  EventActivityTable t;
  t.add("A", "crow", 10.0);
  t.add("B", "animal", 10.0);
  const auto sets = build_preliminary_sets(t, o, 20);
  REQUIRE(sets.at("A").oc.contains("animal"));
  REQUIRE(sets.at("A").oc.contains("dog"));

  const auto high = apply_refinement(sets, {{"A", "crow", "animal", Verdict::HighlySimilar}}, o);
  CHECK_FALSE(high.at("A").oc.contains("animal"));
  CHECK_FALSE(high.at("A").oc.contains("dog"));
  CHECK_FALSE(high.at("A").oc.contains("bird"));

  const auto part = apply_refinement(sets, {{"A", "crow", "animal", Verdict::PartiallySimilar}}, o);
  CHECK_FALSE(part.at("A").oc.contains("animal"));
  CHECK(part.at("A").oc.contains("dog"));
  CHECK(part.at("A").oc.contains("bird"));

  const auto same = apply_refinement(sets, {{"A", "crow", "animal", Verdict::Distinct}}, o);
  CHECK(same.at("A").oc == sets.at("A").oc);

  CHECK(code_of([&] { apply_refinement(sets, {{"A", "dog", "animal", Verdict::Distinct}}, o); }) ==
        ErrorCode::InvalidJudgmentTarget);
  CHECK(code_of([&] { apply_refinement(sets, {{"A", "crow", "dog", Verdict::Distinct}}, o); }) ==
        ErrorCode::InvalidJudgmentTarget);
  CHECK(code_of([&] { apply_refinement(sets, {{"Z", "crow", "animal", Verdict::Distinct}}, o); }) ==
        ErrorCode::InvalidJudgmentTarget);
}

TEST_CASE("verdict parsing, judgments CSV and sets JSON") {
  CHECK(parse_verdict("Highly similar") == Verdict::HighlySimilar);
  CHECK(parse_verdict("partially_similar") == Verdict::PartiallySimilar);
  CHECK(parse_verdict("DISTINCT") == Verdict::Distinct);
  CHECK(code_of([] { parse_verdict("maybe"); }) == ErrorCode::MalformedContainer);

  const auto dir = acad::testing::scratch_dir("judg");
  std::ofstream(dir / "j.csv") << "scene,ic_id,oc_id,verdict\nA,crow,animal,HighlySimilar\n";
  const auto js = load_judgments_csv(dir / "j.csv");
  REQUIRE(js.size() == 1);
  CHECK(js[0].oc_ancestor == "animal");

  EventActivityTable t;
  t.add("A", "crow", 10.0);
  t.add("B", "dog", 10.0);
  const auto sets = build_preliminary_sets(t, animal_tree(), 20);
  const auto text = sets_to_json(sets);
  CHECK(sets_to_json(sets_from_json(text)) == text);
  const auto back = sets_from_json(text);
  CHECK(back.at("A").ic == sets.at("A").ic);
  CHECK(back.at("B").oc == sets.at("B").oc);
}

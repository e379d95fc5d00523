// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <set>

#include "acad/audio/loudness.hpp"
#include "acad/core/csv.hpp"
#include "acad/events/context_sets.hpp"
#include "acad/synth/dataset.hpp"
#include "acad/synth/desk_corpus.hpp"
#include "acad/synth/mix_spec.hpp"
#include "acad/synth/render.hpp"
#include "test_support.hpp"

using namespace acad;
using namespace acad::synth;
using acad::testing::code_of;

namespace {

constexpr int kRate = 4000;

// Two desk scenes with crossed sets and an in-memory catalog.
struct Fixture {
  SynthConfig cfg;
  events::ContextEventSets sets;
  SplitCatalog catalog;
  MemorySourceLibrary sources{kRate};

  Fixture() {
    cfg.sample_rate = kRate;
    cfg.clip_seconds = 4.0;
    cfg.seed = 5;
    for (const auto& scene : desk_scene_names(2)) {
      for (int i = 0; i < 3; ++i) {
        const auto ref = "bg_" + scene + std::to_string(i);
        sources.add(ref, audio::AudioClip(synth_desk_background(scene, 6.0, kRate, 100 + i), kRate));
        catalog.scenes[scene].push_back({ref, 6.0});
      }
      for (const auto& ev : desk_event_classes(scene))
        for (int i = 0; i < 2; ++i) {
          const auto ref = "ev_" + ev + std::to_string(i);
          sources.add(ref, audio::AudioClip(synth_desk_event(ev, 3.5, kRate, 200 + i), kRate));
          catalog.events[ev].push_back({ref, 3.5});
        }
    }
    const auto park = desk_event_classes("park"), street = desk_event_classes("street");
    sets["park"] = {{park.begin(), park.end()}, {street.begin(), street.end()}};
    sets["street"] = {{street.begin(), street.end()}, {park.begin(), park.end()}};
  }
};

}  // namespace

TEST_CASE("synthesis config defaults and validation") {
  SynthConfig c;
  CHECK(c.background_lufs.lo == -15.0);
  CHECK(c.background_lufs.hi == -10.0);
  CHECK(c.per_scene.train == 10000);
  CHECK(c.per_scene.val == 3000);
  CHECK(c.per_scene.test == 3000);
  CHECK(c.clip_samples() == 220500);
  CHECK_NOTHROW(c.validate());
  c.event_seconds = {3.0, 0.5};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("mix spec sampling is deterministic and within ranges") {
  Fixture f;
  const auto a = sample_mix_spec(77, "park", f.catalog, f.sets, f.cfg);
  const auto b = sample_mix_spec(77, "park", f.catalog, f.sets, f.cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(to_json(mix_spec_from_json(nlohmann::json::parse(to_json(a).dump()))).dump() == to_json(a).dump());

  std::set<std::size_t> class_counts;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = sample_mix_spec(seed, seed % 2 ? "park" : "street", f.catalog, f.sets, f.cfg);
    CHECK_NOTHROW(s.validate(f.cfg, f.sets.at(s.scene_class).oc));
    std::map<std::string, int> per_class;
    for (const auto& e : s.events) {
      ++per_class[e.event_class];
      CHECK(f.sets.at(s.scene_class).oc.contains(e.event_class));
      CHECK(e.dur_s >= 0.5);
      CHECK(e.dur_s <= 3.0);
      CHECK(e.start_s >= 0.0);
      CHECK(e.start_s + e.dur_s <= f.cfg.clip_seconds + 1e-9);
      CHECK(e.snr_db >= -5.0);
      CHECK(e.snr_db <= 10.0);
    }
    for (const auto& [id, n] : per_class) CHECK((n >= 1 && n <= 2));
    CHECK(s.background_lufs >= -15.0);
    CHECK(s.background_lufs <= -10.0);
    class_counts.insert(per_class.size());
  }
  CHECK(class_counts == std::set<std::size_t>{1, 2, 3});
}

TEST_CASE("mix spec errors") {
  Fixture f;
  auto empty_oc = f.sets;
  empty_oc["park"].oc.clear();
  CHECK(code_of([&] { sample_mix_spec(1, "park", f.catalog, empty_oc, f.cfg); }) == ErrorCode::EmptyOcSet);
  auto no_bg = f.catalog;
  no_bg.scenes.erase("park");
  CHECK(code_of([&] { sample_mix_spec(1, "park", no_bg, f.sets, f.cfg); }) == ErrorCode::EmptyCatalog);
}

TEST_CASE("rendering: additivity, calibration and the empty mix") {
  Fixture f;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = sample_mix_spec(seed, "street", f.catalog, f.sets, f.cfg);
    const auto pair = render_pair(spec, f.sources, f.cfg);
    REQUIRE(pair.noisy.size() == f.cfg.clip_samples());
    CHECK(std::abs(audio::integrated_loudness(pair.clean).value - spec.background_lufs) < 0.2);
    std::vector<double> sum(pair.clean.samples());
    for (std::size_t k = 0; k < pair.events.size(); ++k) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += pair.events[k].samples()[i];
      // Measured over the placed segment so gating sees the same blocks as the gain stage.
      const auto& e = spec.events[k];
      const auto start = static_cast<std::size_t>(std::llround(e.start_s * kRate));
      const auto n = static_cast<std::size_t>(std::llround(e.dur_s * kRate));
      const auto& canvas = pair.events[k].samples();
      const audio::AudioClip placed(std::vector<double>(canvas.begin() + static_cast<std::ptrdiff_t>(start),
                                                        canvas.begin() + static_cast<std::ptrdiff_t>(std::min(start + n, canvas.size()))),
                                    kRate);
      CHECK(std::abs(audio::integrated_loudness(placed).value - (spec.background_lufs + e.snr_db)) < 0.3);
    }
    for (std::size_t i = 0; i < sum.size(); ++i) CHECK(std::abs(sum[i] - pair.noisy.samples()[i]) < 1e-6);
  }

  auto spec = sample_mix_spec(3, "park", f.catalog, f.sets, f.cfg);
  spec.events.clear();
  const auto pair = render_pair(spec, f.sources, f.cfg);
  CHECK(pair.noisy.samples() == pair.clean.samples());

  auto bad = sample_mix_spec(4, "park", f.catalog, f.sets, f.cfg);
  f.sources.add("short", audio::AudioClip(std::vector<double>(100, 0.1), kRate));
  bad.events.at(0).source = "short";
  CHECK(code_of([&] { render_pair(bad, f.sources, f.cfg); }) == ErrorCode::SourceTooShort);
  f.sources.add("silent", audio::AudioClip(std::vector<double>(kRate * 4, 0.0), kRate));
  bad = sample_mix_spec(4, "park", f.catalog, f.sets, f.cfg);
  bad.events.at(0).source = "silent";
  CHECK(code_of([&] { render_pair(bad, f.sources, f.cfg); }) == ErrorCode::SilentSource);
}

TEST_CASE("dataset generation: counts, determinism and split hygiene") {
  const auto dir = acad::testing::scratch_dir("dataset");
  DeskCorpusOptions opt;
  opt.backgrounds_train = 3;
  opt.backgrounds_eval = 2;
  opt.events_train = 2;
  opt.events_eval = 2;
  make_desk_corpus(dir / "corpus", opt);
  const auto catalogs = load_catalogs(dir / "corpus" / "catalogs.json");
  const auto park = desk_event_classes("park"), street = desk_event_classes("street");
  events::ContextEventSets sets;
  sets["park"] = {{park.begin(), park.end()}, {street.begin(), street.end()}};
  sets["street"] = {{street.begin(), street.end()}, {park.begin(), park.end()}};

  SynthConfig cfg;
  cfg.sample_rate = opt.sample_rate;
  cfg.clip_seconds = 2.0;
  cfg.event_seconds = {0.5, 1.5};
  cfg.per_scene = {50, 4, 3};
  cfg.seed = 11;
  const auto m1 = generate_dataset(cfg, sets, catalogs, dir / "a", "h1");
  CHECK(m1.split("train").size() == 100);
  CHECK(m1.split("val").size() == 8);
  CHECK(m1.split("test").size() == 6);
  std::size_t wavs = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "a" / "audio" / "train"))
    wavs += e.path().extension() == ".wav";
  CHECK(wavs == 200);
  std::set<std::string> ids;
  for (const auto& r : m1.records) ids.insert(r.pair_id);
  CHECK(ids.size() == m1.records.size());
  CHECK(split_hygiene_violations(m1, catalogs).empty());

  const auto m2 = generate_dataset(cfg, sets, catalogs, dir / "b", "h1");
  CHECK(read_text_file(dir / "a" / "manifest.jsonl") == read_text_file(dir / "b" / "manifest.jsonl"));
  const auto loaded = load_manifest(dir / "a" / "manifest.jsonl");
  CHECK(loaded.records.size() == m1.records.size());
  CHECK(loaded.config_hash == "h1");
  CHECK(manifest_to_jsonl(loaded) == read_text_file(dir / "a" / "manifest.jsonl"));

  // A training record pointing at a test source is caught.
  auto tampered = loaded;
  tampered.records.front().mix_spec.background = catalogs.split("test").scenes.begin()->second.front().ref;
  CHECK_FALSE(split_hygiene_violations(tampered, catalogs).empty());
}

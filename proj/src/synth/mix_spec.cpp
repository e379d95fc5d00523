// SPDX-License-Identifier: Apache-2.0
#include "acad/synth/mix_spec.hpp"

#include <algorithm>
#include <cmath>

#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/core/rng.hpp"

namespace acad::synth {

std::size_t SynthConfig::clip_samples() const {
  return static_cast<std::size_t>(std::llround(clip_seconds * sample_rate));
}

void SynthConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::ConfigInvalid, "synthesis config: " + what);
  };
  check(sample_rate > 0, "sample_rate must be positive");
  check(clip_seconds > 0, "clip_seconds must be positive");
  check(background_lufs.lo <= background_lufs.hi, "background_lufs range reversed");
  check(event_classes.lo >= 0 && event_classes.lo <= event_classes.hi, "event_classes range");
  check(instances_per_class.lo >= 1 && instances_per_class.lo <= instances_per_class.hi,
        "instances_per_class range");
  check(event_seconds.lo > 0 && event_seconds.lo <= event_seconds.hi, "event_seconds range");
  check(event_seconds.hi <= clip_seconds, "events longer than the clip");
  check(snr_db.lo <= snr_db.hi, "snr_db range reversed");
  check(fade_seconds >= 0 && 2 * fade_seconds <= event_seconds.lo, "fade longer than shortest event");
  check(max_redraws >= 1, "max_redraws must be >= 1");
  check(per_scene.train >= 0 && per_scene.val >= 0 && per_scene.test >= 0, "negative split count");
}

const SplitCatalog& Catalogs::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) fail(ErrorCode::InsufficientSources, "catalog has no split '" + name + "'");
  return it->second;
}

namespace {

std::vector<SourceEntry> entries_from_json(const nlohmann::json& arr) {
  std::vector<SourceEntry> out;
  for (const auto& e : arr)
    out.push_back(SourceEntry{e.at("path").get<std::string>(), e.at("duration_s").get<double>()});
  return out;
}

nlohmann::ordered_json entries_to_json(const std::vector<SourceEntry>& entries) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) arr.push_back({{"path", e.ref}, {"duration_s", e.duration_s}});
  return arr;
}

}  // namespace

Catalogs load_catalogs(const std::filesystem::path& path) {
  Catalogs cat;
  cat.root = std::filesystem::absolute(path).parent_path();
  try {
    const auto doc = nlohmann::json::parse(read_text_file(path));
    for (const auto& [split, body] : doc.at("splits").items()) {
      SplitCatalog sc;
      if (body.contains("scenes"))
        for (const auto& [scene, arr] : body["scenes"].items()) sc.scenes[scene] = entries_from_json(arr);
      if (body.contains("events"))
        for (const auto& [id, arr] : body["events"].items()) sc.events[id] = entries_from_json(arr);
      cat.splits[split] = std::move(sc);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedContainer, std::string("catalog JSON: ") + e.what());
  }
  return cat;
}

std::string catalogs_to_json(const Catalogs& catalogs) {
  nlohmann::ordered_json doc;
  doc["splits"] = nlohmann::ordered_json::object();
  for (const auto& [split, sc] : catalogs.splits) {
    auto& s = doc["splits"][split];
    s["scenes"] = nlohmann::ordered_json::object();
    s["events"] = nlohmann::ordered_json::object();
    for (const auto& [scene, entries] : sc.scenes) s["scenes"][scene] = entries_to_json(entries);
    for (const auto& [id, entries] : sc.events) s["events"][id] = entries_to_json(entries);
  }
  return doc.dump(2) + "\n";
}

void MixSpec::validate(const SynthConfig& cfg, const events::EventSet& oc) const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::InvalidArgument, "mix spec: " + what);
  };
  constexpr double kTol = 1e-9;
  check(background_lufs >= cfg.background_lufs.lo - kTol && background_lufs <= cfg.background_lufs.hi + kTol,
        "background_lufs out of range");
  std::map<events::EventId, int> per_class;
  for (const auto& e : events) {
    per_class[e.event_class]++;
    check(oc.contains(e.event_class), "event class '" + e.event_class + "' is not OC");
    check(e.dur_s >= cfg.event_seconds.lo - kTol && e.dur_s <= cfg.event_seconds.hi + kTol,
          "event duration out of range");
    check(e.snr_db >= cfg.snr_db.lo - kTol && e.snr_db <= cfg.snr_db.hi + kTol, "snr out of range");
    check(e.start_s >= 0 && e.start_s + e.dur_s <= cfg.clip_seconds + kTol, "event outside clip");
  }
  const auto n_classes = static_cast<int>(per_class.size());
  if (!events.empty())
    check(n_classes >= std::max(1, cfg.event_classes.lo) && n_classes <= cfg.event_classes.hi,
          "distinct event class count out of range");
  for (const auto& [id, n] : per_class)
    check(n >= cfg.instances_per_class.lo && n <= cfg.instances_per_class.hi,
          "instances of '" + id + "' out of range");
}

nlohmann::ordered_json to_json(const MixSpec& spec) {
  nlohmann::ordered_json j;
  j["scene_class"] = spec.scene_class;
  j["background"] = spec.background;
  j["background_offset_s"] = spec.background_offset_s;
  j["background_lufs"] = spec.background_lufs;
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : spec.events)
    j["events"].push_back({{"event_class", e.event_class},
                           {"source", e.source},
                           {"start_s", e.start_s},
                           {"dur_s", e.dur_s},
                           {"snr_db", e.snr_db}});
  return j;
}

MixSpec mix_spec_from_json(const nlohmann::json& j) {
  MixSpec spec;
  spec.scene_class = j.at("scene_class").get<std::string>();
  spec.background = j.at("background").get<std::string>();
  spec.background_offset_s = j.value("background_offset_s", 0.0);
  spec.background_lufs = j.at("background_lufs").get<double>();
  for (const auto& e : j.at("events"))
    spec.events.push_back(EventPlacement{e.at("event_class").get<std::string>(),
                                         e.at("source").get<std::string>(),
                                         e.at("start_s").get<double>(), e.at("dur_s").get<double>(),
                                         e.at("snr_db").get<double>()});
  return spec;
}

MixSpec sample_mix_spec(std::uint64_t rng_seed, const events::SceneLabel& scene,
                        const SplitCatalog& catalog, const events::ContextEventSets& sets,
                        const SynthConfig& cfg) {
  auto set_it = sets.find(scene);
  if (set_it == sets.end() || set_it->second.oc.empty())
    fail(ErrorCode::EmptyOcSet, "no OC event classes for scene '" + scene + "'");
  auto bg_it = catalog.scenes.find(scene);
  if (bg_it == catalog.scenes.end() || bg_it->second.empty())
    fail(ErrorCode::EmptyCatalog, "no background sources for scene '" + scene + "'");

  // OC classes that have at least one source, in id order.
  std::vector<events::EventId> eligible;
  for (const auto& id : set_it->second.oc) {
    auto ev = catalog.events.find(id);
    if (ev != catalog.events.end() && !ev->second.empty()) eligible.push_back(id);
  }
  if (eligible.empty() && cfg.event_classes.hi > 0)
    fail(ErrorCode::EmptyCatalog, "no event sources for any OC class of '" + scene + "'");

  Rng rng(rng_seed);
  MixSpec spec;
  spec.scene_class = scene;
  const auto& backgrounds = bg_it->second;
  const auto& bg = backgrounds[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(backgrounds.size()) - 1))];
  spec.background = bg.ref;
  spec.background_offset_s = rng.uniform(0.0, std::max(0.0, bg.duration_s - cfg.clip_seconds));
  spec.background_lufs = rng.uniform(cfg.background_lufs.lo, cfg.background_lufs.hi);

  if (cfg.event_classes.hi == 0) return spec;
  const auto drawn = rng.uniform_int(std::max(1, cfg.event_classes.lo), cfg.event_classes.hi);
  const auto n_classes = std::min<std::size_t>(static_cast<std::size_t>(drawn), eligible.size());
  rng.shuffle(eligible);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const auto& id = eligible[c];
    const auto& sources = catalog.events.at(id);
    const auto instances = rng.uniform_int(cfg.instances_per_class.lo, cfg.instances_per_class.hi);
    for (std::int64_t k = 0; k < instances; ++k) {
      EventPlacement e;
      e.event_class = id;
      bool placed = false;
      for (int attempt = 0; attempt < cfg.max_redraws && !placed; ++attempt) {
        const auto& src = sources[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(sources.size()) - 1))];
        const double dur = rng.uniform(cfg.event_seconds.lo, cfg.event_seconds.hi);
        if (src.duration_s + 1e-9 < dur) continue;
        e.source = src.ref;
        e.dur_s = dur;
        placed = true;
      }
      if (!placed)
        fail(ErrorCode::SourceTooShort, "no source of '" + id + "' long enough after " +
                                            std::to_string(cfg.max_redraws) + " draws");
      e.start_s = rng.uniform(0.0, cfg.clip_seconds - e.dur_s);
      e.snr_db = rng.uniform(cfg.snr_db.lo, cfg.snr_db.hi);
      spec.events.push_back(std::move(e));
    }
  }
  return spec;
}

}  // namespace acad::synth

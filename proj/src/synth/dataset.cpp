// SPDX-License-Identifier: Apache-2.0
#include "acad/synth/dataset.hpp"

#include <cstdio>
#include <exception>
#include <set>
#include <sstream>

#include "acad/audio/wav.hpp"
#include "acad/core/csv.hpp"
#include "acad/core/rng.hpp"

namespace acad::synth {

std::vector<const ManifestRecord*> DatasetManifest::split(const std::string& name) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records)
    if (r.split == name) out.push_back(&r);
  return out;
}

std::vector<events::SceneLabel> DatasetManifest::scenes() const {
  std::set<events::SceneLabel> s;
  for (const auto& r : records) s.insert(r.scene_class);
  return {s.begin(), s.end()};
}

std::string manifest_to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) {
    nlohmann::ordered_json j;
    j["pair_id"] = r.pair_id;
    j["scene_class"] = r.scene_class;
    j["split"] = r.split;
    j["noisy_path"] = r.noisy_path;
    j["clean_path"] = r.clean_path;
    j["mix_spec"] = to_json(r.mix_spec);
    j["seed"] = r.seed;
    j["clipped"] = r.clipped;
    j["config_hash"] = manifest.config_hash;
    j["master_seed"] = manifest.master_seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  DatasetManifest m;
  m.root = std::filesystem::absolute(path).parent_path();
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.pair_id = j.at("pair_id").get<std::string>();
      r.scene_class = j.at("scene_class").get<std::string>();
      r.split = j.at("split").get<std::string>();
      r.noisy_path = j.at("noisy_path").get<std::string>();
      r.clean_path = j.at("clean_path").get<std::string>();
      r.mix_spec = mix_spec_from_json(j.at("mix_spec"));
      r.seed = j.at("seed").get<std::uint64_t>();
      r.clipped = j.value("clipped", false);
      m.config_hash = j.value("config_hash", std::string{});
      m.master_seed = j.value("master_seed", std::uint64_t{0});
      m.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedContainer, std::string("manifest line: ") + e.what());
    }
  }
  return m;
}

DatasetManifest generate_dataset(const SynthConfig& cfg, const events::ContextEventSets& sets,
                                 const Catalogs& catalogs, const std::filesystem::path& out_dir,
                                 const std::string& config_hash) {
  cfg.validate();
  DatasetManifest manifest;
  manifest.root = std::filesystem::absolute(out_dir);
  manifest.config_hash = config_hash;
  manifest.master_seed = cfg.seed;

  // Recipes are drawn up front; rendering is the expensive, parallel part.
  for (const auto& split : kSplits) {
    const int count = split == "train" ? cfg.per_scene.train
                      : split == "val" ? cfg.per_scene.val
                                       : cfg.per_scene.test;
    if (count == 0) continue;
    const SplitCatalog& catalog = catalogs.split(split);
    for (const auto& [scene, unused] : sets) {
      if (!catalog.scenes.contains(scene) || catalog.scenes.at(scene).empty())
        fail(ErrorCode::InsufficientSources, "split '" + split + "' has no backgrounds for '" + scene + "'");
      for (int i = 0; i < count; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%05d", i);
        ManifestRecord r;
        r.pair_id = split + "_" + scene + "_" + buf;
        r.scene_class = scene;
        r.split = split;
        r.noisy_path = "audio/" + split + "/" + r.pair_id + "_noisy.wav";
        r.clean_path = "audio/" + split + "/" + r.pair_id + "_clean.wav";
        r.seed = Rng::derive_seed(cfg.seed, r.pair_id);
        r.mix_spec = sample_mix_spec(r.seed, scene, catalog, sets, cfg);
        manifest.records.push_back(std::move(r));
      }
    }
  }

  for (const auto& split : kSplits) std::filesystem::create_directories(manifest.root / "audio" / split);
  const SourceLibrary sources(catalogs.root, cfg.sample_rate);
  const std::string comment = "acad config_hash=" + config_hash + " master_seed=" + std::to_string(cfg.seed);

  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(manifest.records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      auto& r = manifest.records[static_cast<std::size_t>(i)];
      const RenderedPair pair = render_pair(r.mix_spec, sources, cfg);
      r.clipped = pair.clipped;
      audio::write_wav(pair.noisy, manifest.root / r.noisy_path, comment);
      audio::write_wav(pair.clean, manifest.root / r.clean_path, comment);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  write_text_file(manifest.root / "manifest.jsonl", manifest_to_jsonl(manifest));
  return manifest;
}

std::vector<std::string> split_hygiene_violations(const DatasetManifest& manifest, const Catalogs& catalogs) {
  std::map<std::string, std::set<std::string>> allowed;
  for (const auto& [split, sc] : catalogs.splits) {
    for (const auto& [scene, entries] : sc.scenes)
      for (const auto& e : entries) allowed[split].insert(e.ref);
    for (const auto& [id, entries] : sc.events)
      for (const auto& e : entries) allowed[split].insert(e.ref);
  }
  std::vector<std::string> out;
  for (const auto& r : manifest.records) {
    const auto& ok = allowed[r.split];
    if (!ok.contains(r.mix_spec.background)) out.push_back(r.pair_id + ": " + r.mix_spec.background);
    for (const auto& e : r.mix_spec.events)
      if (!ok.contains(e.source)) out.push_back(r.pair_id + ": " + e.source);
  }
  return out;
}

}  // namespace acad::synth

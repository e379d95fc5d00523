// SPDX-License-Identifier: Apache-2.0
#include "acad/pipeline/pipeline.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <sstream>

#include "acad/audio/wav.hpp"
#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/events/activity.hpp"
#include "acad/events/ontology.hpp"
#include "acad/nn/checkpoint.hpp"

namespace acad::pipeline {

namespace {

void emit(const Logger& log, const std::string& line) {
  if (log) log(line);
}

void write_csv_artifact(const fs::path& path, const std::string& body, const std::string& hash, std::uint64_t seed) {
  fs::create_directories(path.parent_path());
  write_text_file(path, provenance_comment(hash, seed) + body);
}

// Parses "# acad config_hash=<h> master_seed=<s>" or the WAV comment form.
bool parse_provenance(const std::string& text, std::string& hash, std::uint64_t& seed) {
  const auto h = text.find("config_hash=");
  const auto s = text.find("master_seed=");
  if (h == std::string::npos || s == std::string::npos) return false;
  std::istringstream hs(text.substr(h + 12)), ss(text.substr(s + 12));
  hs >> hash;
  ss >> seed;
  return !hs.fail() && !ss.fail();
}

train::TrainConfig stage_config(const config::RunConfig& cfg, std::uint64_t seed) {
  auto t = cfg.training;
  t.seed = seed;
  return t;
}

nn::ContextExtractorConfig context_config(const config::RunConfig& cfg, std::size_t num_classes) {
  auto c = cfg.context;
  c.num_classes = num_classes;
  return c;
}

nn::DenoiserConfig denoiser_config(const config::RunConfig& cfg, train::Variant v, std::size_t num_classes) {
  auto d = cfg.denoiser;
  d.film_embedding_dim = train::embedding_dim(v, cfg.context.embedding_dim(), num_classes);
  return d;
}

}  // namespace

std::string provenance_comment(const std::string& config_hash, std::uint64_t master_seed) {
  return "# acad config_hash=" + config_hash + " master_seed=" + std::to_string(master_seed) + "\n";
}

BuildSetsResult build_sets(const config::OntologyInputs& inputs, const fs::path& base_dir, const fs::path& out) {
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
  const auto ont = events::load_ontology(resolve(inputs.ontology));
  const auto activity_path = resolve(inputs.activity);
  const auto table = activity_path.extension() == ".jsonl"
                         ? events::load_activity_jsonl(activity_path, ont, inputs.frame_seconds)
                         : events::load_activity_csv(activity_path);

  BuildSetsResult res;
  res.sets = events::build_preliminary_sets(table, ont, inputs.top_k);
  if (inputs.judgments.empty()) {
    res.warnings.push_back("no judgments file configured; refinement skipped");
  } else if (const auto jp = resolve(inputs.judgments); !fs::exists(jp)) {
    res.warnings.push_back("judgments file " + jp.string() + " not found; refinement skipped");
  } else if (const auto judgments = events::load_judgments_csv(jp); judgments.empty()) {
    res.warnings.push_back("judgments file " + jp.string() + " holds no verdicts; refinement skipped");
  } else {
    res.sets = events::apply_refinement(res.sets, judgments, ont);
  }

  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  write_text_file(out, events::sets_to_json(res.sets));
  const auto warn_path = out.parent_path() / (out.stem().string() + ".warnings.json");
  if (!res.warnings.empty()) {
    nlohmann::ordered_json w = nlohmann::ordered_json::array();
    for (const auto& msg : res.warnings) w.push_back({{"warning", "refinement_skipped"}, {"detail", msg}});
    write_text_file(warn_path, w.dump(2) + "\n");
  } else if (fs::exists(warn_path)) {
    fs::remove(warn_path);
  }
  return res;
}

synth::DatasetManifest synthesize(const config::RunConfig& cfg, const fs::path& sets_path, const fs::path& out_dir) {
  const auto sets = events::load_sets(sets_path);
  const auto catalogs = synth::load_catalogs(cfg.resolve(cfg.catalogs));
  return synth::generate_dataset(cfg.synthesis, sets, catalogs, out_dir, cfg.hash());
}

void check_config_hash(const config::RunConfig& cfg, const std::string& artifact_hash, const std::string& what) {
  require(artifact_hash == cfg.hash(), ErrorCode::ConfigHashMismatch,
          what + " was produced under config " + artifact_hash + ", current config is " + cfg.hash());
}

train::FeatureBank load_bank(const config::RunConfig& cfg, const synth::DatasetManifest& manifest,
                             const std::string& split) {
  check_config_hash(cfg, manifest.config_hash, "manifest");
  return train::extract_features(manifest, split, cfg.features(), manifest.scenes());
}

PretrainOutput pretrain(const config::RunConfig& cfg, const train::FeatureBank& train, const train::FeatureBank& val,
                        std::uint64_t seed, const fs::path& out_dir, const Logger& log) {
  nn::ContextExtractor c(context_config(cfg, train.scenes.size()));
  c.init(seed);
  auto tcfg = stage_config(cfg, seed);
  tcfg.batch_size = cfg.pretrain.batch_size;
  tcfg.max_epochs = cfg.pretrain.max_epochs;
  tcfg.patience = cfg.pretrain.patience;

  PretrainOutput out;
  out.result = train::pretrain_context(c, train, val, tcfg, [&](const train::EpochLog& e) {
    if (e.split == "val")
      emit(log, "pretrain seed " + std::to_string(seed) + " epoch " + std::to_string(e.epoch) +
                    " val accuracy " + std::to_string(e.accuracy));
  });
  fs::create_directories(out_dir);
  out.checkpoint = out_dir / "context.ckpt";
  nn::save_checkpoint(out.checkpoint,
                      {nn::kStageContext, seed, "", cfg.hash(), cfg.seed, out.result.best_epoch},
                      {{"context", &c}});
  write_csv_artifact(out_dir / "pretrain_log.csv", train::training_log_csv(out.result.log), cfg.hash(), cfg.seed);
  return out;
}

void check_variant_inputs(train::Variant variant, const synth::DatasetManifest& manifest,
                          const std::optional<fs::path>& context_ckpt) {
  const auto name = train::to_string(variant);
  if (train::uses_context_model(variant))
    require(context_ckpt.has_value() && fs::is_regular_file(*context_ckpt), ErrorCode::VariantInputMissing,
            name + " needs an existing context checkpoint (--context-ckpt)");
  if (train::uses_scene_labels(variant))
    for (const auto& r : manifest.records)
      require(!r.scene_class.empty(), ErrorCode::VariantInputMissing,
              name + " needs scene labels; pair " + r.pair_id + " has none");
}

TrainOutput train_variant(const config::RunConfig& cfg, const train::FeatureBank& train,
                          const train::FeatureBank& val, train::Variant variant,
                          const std::optional<fs::path>& context_ckpt, std::uint64_t seed, const fs::path& out_dir,
                          const Logger& log) {
  const auto name = train::to_string(variant);
  std::unique_ptr<nn::ContextExtractor> c;
  if (train::uses_context_model(variant)) {
    require(context_ckpt.has_value(), ErrorCode::VariantInputMissing, name + " needs a context checkpoint");
    const auto ck = nn::load_checkpoint(*context_ckpt);
    check_config_hash(cfg, ck.meta.config_hash, "context checkpoint " + context_ckpt->string());
    require(ck.meta.stage == nn::kStageContext && ck.has_module("context"), ErrorCode::VariantInputMissing,
            context_ckpt->string() + " is not a pretrained context checkpoint");
    c = std::make_unique<nn::ContextExtractor>(nn::context_config_from_fingerprint(ck.fingerprints.at("context")));
    nn::restore(*c, ck, "context");
  }
  nn::Denoiser d(denoiser_config(cfg, variant, train.scenes.size()));
  d.init(seed);

  TrainOutput out;
  out.result = train::train_denoiser(d, c.get(), train, val, [&] {
    auto t = stage_config(cfg, seed);
    t.variant = variant;
    return t;
  }(), [&](const train::EpochLog& e) {
    if (e.split == "val")
      emit(log, name + " seed " + std::to_string(seed) + " epoch " + std::to_string(e.epoch) + " val SI-SDR " +
                    std::to_string(e.si_sdr));
  });

  fs::create_directories(out_dir);
  out.checkpoint = out_dir / "denoiser.ckpt";
  std::vector<nn::ModuleRef> modules{{"denoiser", &d}};
  if (c) modules.emplace_back("context", c.get());
  nn::save_checkpoint(out.checkpoint, {nn::kStageDenoiser, seed, name, cfg.hash(), cfg.seed, out.result.best_epoch},
                      modules);
  write_csv_artifact(out_dir / "train_log.csv", train::training_log_csv(out.result.log), cfg.hash(), cfg.seed);
  return out;
}

eval::EvalReport evaluate(const config::RunConfig& cfg, const train::FeatureBank& test, const fs::path& ckpt,
                          train::Variant variant, const fs::path& out_csv) {
  const auto ck = nn::load_checkpoint(ckpt);
  check_config_hash(cfg, ck.meta.config_hash, "checkpoint " + ckpt.string());
  auto report = eval::evaluate_checkpoint(test, ck, variant, std::to_string(ck.meta.seed));
  write_csv_artifact(out_csv, eval::report_to_csv(report), cfg.hash(), cfg.seed);
  return report;
}

eval::EvalReport aggregate(const std::vector<fs::path>& reports, const fs::path& out_csv) {
  std::vector<eval::EvalReport> runs;
  std::string hash;
  std::uint64_t seed = 0;
  for (const auto& p : reports) {
    const auto text = read_text_file(p);
    std::string h;
    std::uint64_t s = 0;
    if (parse_provenance(text.substr(0, text.find('\n')), h, s)) {
      require(hash.empty() || (h == hash && s == seed), ErrorCode::ConfigHashMismatch,
              p.string() + " comes from a different config or master seed");
      hash = h;
      seed = s;
    }
    runs.push_back(eval::report_from_csv(text));
  }
  auto agg = eval::aggregate_runs(runs);
  const auto body = eval::report_to_csv(agg);
  fs::create_directories(out_csv.parent_path());
  write_text_file(out_csv, hash.empty() ? body : provenance_comment(hash, seed) + body);
  return agg;
}

double export_embeddings(const config::RunConfig& cfg, const train::FeatureBank& bank, const fs::path& ckpt,
                         const fs::path& out_csv) {
  const auto ck = nn::load_checkpoint(ckpt);
  check_config_hash(cfg, ck.meta.config_hash, "checkpoint " + ckpt.string());
  auto models = eval::load_models(ck);
  const auto rows = eval::export_bottleneck(*models.denoiser, models.context.get(), models.variant, bank,
                                            cfg.evaluation.batch_size);
  write_csv_artifact(out_csv, eval::bottleneck_to_csv(rows), cfg.hash(), cfg.seed);
  return eval::bottleneck_silhouette(rows);
}

VerifyReport verify(const fs::path& dir, const config::RunConfig* cfg) {
  VerifyReport rep;
  require(fs::is_directory(dir), ErrorCode::IoFailure, dir.string() + " is not a directory");
  std::string want_hash = cfg ? cfg->hash() : std::string{};
  std::uint64_t want_seed = cfg ? cfg->seed : 0;
  bool have = cfg != nullptr;

  auto check = [&](const fs::path& p, bool found, const std::string& h, std::uint64_t s) {
    ++rep.artifacts;
    if (!found) {
      rep.problems.push_back(p.string() + ": no config hash recorded");
      return;
    }
    if (!have) {
      want_hash = h;
      want_seed = s;
      have = true;
    }
    if (h != want_hash) rep.problems.push_back(p.string() + ": config hash " + h + " != " + want_hash);
    if (s != want_seed)
      rep.problems.push_back(p.string() + ": master seed " + std::to_string(s) + " != " + std::to_string(want_seed));
  };

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const auto ext = p.extension().string();
    try {
      if (ext == ".wav") {
        std::string h;
        std::uint64_t s = 0;
        const bool found = parse_provenance(audio::read_wav_comment(p), h, s);
        check(p, found, h, s);
      } else if (p.filename() == "manifest.jsonl") {
        const auto m = synth::load_manifest(p);
        check(p, !m.config_hash.empty(), m.config_hash, m.master_seed);
      } else if (ext == ".ckpt") {
        const auto ck = nn::load_checkpoint(p);
        check(p, !ck.meta.config_hash.empty(), ck.meta.config_hash, ck.meta.master_seed);
      } else if (ext == ".csv") {
        const auto text = read_text_file(p);
        std::string h;
        std::uint64_t s = 0;
        const bool found = parse_provenance(text.substr(0, text.find('\n')), h, s);
        check(p, found, h, s);
      }
    } catch (const Error& e) {
      ++rep.artifacts;
      rep.problems.push_back(p.string() + ": " + e.what());
    }
  }
  return rep;
}

std::uint64_t run_seed(const config::RunConfig& cfg, std::size_t r) { return cfg.seed + r; }

StudyResult run_study(const config::RunConfig& cfg, const Logger& log) {
  cfg.validate();
  StudyResult study;
  study.root = cfg.resolve(cfg.run_dir);
  const auto& root = study.root;
  fs::create_directories(root);
  write_text_file(root / "config.yaml", cfg.canonical());

  emit(log, "building context event sets");
  const auto sets = build_sets(cfg.ontology, cfg.base_dir, root / "sets.json");
  for (const auto& w : sets.warnings) emit(log, "warning: " + w);

  emit(log, "synthesizing pairs");
  const auto manifest = synthesize(cfg, root / "sets.json", root / "data");
  emit(log, "extracting features");
  const auto train_bank = load_bank(cfg, manifest, "train");
  const auto val_bank = load_bank(cfg, manifest, "val");
  const auto test_bank = load_bank(cfg, manifest, "test");

  std::vector<train::Variant> variants;
  for (const auto& v : cfg.evaluation.variants) variants.push_back(train::parse_variant(v));

  std::vector<fs::path> report_paths;
  for (std::size_t r = 0; r < cfg.evaluation.runs; ++r) {
    RunRecord rec;
    rec.seed = run_seed(cfg, r);
    const auto run_dir = root / "runs" / ("seed_" + std::to_string(rec.seed));
    std::optional<fs::path> context_ckpt;
    const bool need_context = std::any_of(variants.begin(), variants.end(), train::uses_context_model);
    if (need_context) {
      const auto pre = pretrain(cfg, train_bank, val_bank, rec.seed, run_dir / "context", log);
      rec.pretrain_val_accuracy = pre.result.best_val_accuracy;
      context_ckpt = pre.checkpoint;
      emit(log, "seed " + std::to_string(rec.seed) + " context val accuracy " +
                    std::to_string(rec.pretrain_val_accuracy));
    }
    for (auto v : variants) {
      const auto name = train::to_string(v);
      const auto vdir = run_dir / name;
      const auto trained = train_variant(cfg, train_bank, val_bank, v,
                                         train::uses_context_model(v) ? context_ckpt : std::nullopt, rec.seed, vdir,
                                         log);
      if (v == train::Variant::FrozenAsc) {
        rec.frozen_hash_before = trained.result.context_hash_before;
        rec.frozen_hash_after = trained.result.context_hash_after;
      }
      const auto report_path = root / "reports" / (name + "_seed_" + std::to_string(rec.seed) + ".csv");
      auto report = evaluate(cfg, test_bank, trained.checkpoint, v, report_path);
      report_paths.push_back(report_path);
      for (const auto& row : report)
        if (row.scene == eval::kAllScenes && row.variant == name)
          emit(log, name + " seed " + std::to_string(rec.seed) + " test SI-SDR " + std::to_string(row.si_sdr_mean));
      rec.report.insert(rec.report.end(), report.begin(), report.end());
    }
    study.runs.push_back(std::move(rec));
  }
  if (cfg.evaluation.runs >= 2) study.summary = aggregate(report_paths, root / "reports" / "summary.csv");
  return study;
}

}  // namespace acad::pipeline

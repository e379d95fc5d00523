// SPDX-License-Identifier: Apache-2.0
// acad: the whole pipeline as subcommands over one YAML run config.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <yaml-cpp/exceptions.h>

#include "acad/config/run_config.hpp"
#include "acad/core/error.hpp"
#include "acad/pipeline/pipeline.hpp"
#include "acad/synth/desk_corpus.hpp"

namespace fs = std::filesystem;
using namespace acad;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Config: return kExitConfig;
    case ErrorClass::Data: return kExitData;
    case ErrorClass::Runtime: return kExitRuntime;
  }
  return kExitRuntime;
}

void log_line(const std::string& s) { std::cerr << "[acad] " << s << std::endl; }

struct ConfigFlags {
  std::string path;
  std::optional<std::uint64_t> master_seed;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", path, "run config YAML")->required()->check(CLI::ExistingFile);
    cmd->add_option("--master-seed", master_seed, "override the config's master seed");
  }
  config::RunConfig load() const {
    auto cfg = config::load_run_config(path);
    if (master_seed) {
      cfg.seed = *master_seed;
      cfg.synthesis.seed = *master_seed;
      cfg.training.seed = *master_seed;
    }
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic contextual audio denoising pipeline"};
  app.require_subcommand(1);

  // make-desk-corpus
  auto* desk = app.add_subcommand("make-desk-corpus", "write the synthetic desk-scale corpus and its config");
  std::string desk_out;
  synth::DeskCorpusOptions desk_opt;
  desk->add_option("--out", desk_out)->required();
  desk->add_option("--scenes", desk_opt.scenes, "2 or 3")->capture_default_str();
  desk->add_option("--sample-rate", desk_opt.sample_rate)->capture_default_str();
  desk->add_option("--clip-seconds", desk_opt.clip_seconds)->capture_default_str();
  desk->add_option("--seed", desk_opt.seed)->capture_default_str();

  // build-sets
  auto* sets_cmd = app.add_subcommand("build-sets", "IC/OC event sets per scene");
  std::string sets_config, sets_out;
  config::OntologyInputs sets_in;
  sets_cmd->add_option("--config", sets_config, "take the ontology inputs from a run config");
  sets_cmd->add_option("--ontology", sets_in.ontology);
  sets_cmd->add_option("--activity", sets_in.activity);
  sets_cmd->add_option("--judgments", sets_in.judgments, "optional; refinement is skipped without it");
  sets_cmd->add_option("--top-k", sets_in.top_k)->capture_default_str();
  sets_cmd->add_option("--frame-seconds", sets_in.frame_seconds)->capture_default_str();
  sets_cmd->add_option("--out", sets_out)->required();

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "render noisy/clean pairs and the manifest");
  ConfigFlags syn_cfg;
  std::string syn_sets, syn_out;
  syn_cfg.add(syn);
  syn->add_option("--sets", syn_sets)->required()->check(CLI::ExistingFile);
  syn->add_option("--out", syn_out)->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "stage 1: train the context extractor on scene labels");
  ConfigFlags pre_cfg;
  std::string pre_manifest, pre_out;
  std::optional<std::uint64_t> pre_seed;
  pre_cfg.add(pre);
  pre->add_option("--manifest", pre_manifest)->required()->check(CLI::ExistingFile);
  pre->add_option("--seed", pre_seed, "run seed (default: master seed)");
  pre->add_option("--out", pre_out, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "stage 2: train the denoiser for one variant");
  ConfigFlags tr_cfg;
  std::string tr_manifest, tr_out, tr_variant;
  std::optional<std::string> tr_context;
  std::optional<std::uint64_t> tr_seed;
  tr_cfg.add(tr);
  tr->add_option("--manifest", tr_manifest)->required()->check(CLI::ExistingFile);
  tr->add_option("--variant", tr_variant)->required();
  tr->add_option("--context-ckpt", tr_context, "stage-1 checkpoint, needed by frozen_asc and finetuned_asc");
  tr->add_option("--seed", tr_seed, "run seed (default: master seed)");
  tr->add_option("--out", tr_out, "output directory")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "SI-SDR / SDR report of a stage-2 checkpoint on the test split");
  ConfigFlags ev_cfg;
  std::string ev_manifest, ev_ckpt, ev_variant, ev_out;
  ev_cfg.add(ev);
  ev->add_option("--manifest", ev_manifest)->required()->check(CLI::ExistingFile);
  ev->add_option("--ckpt", ev_ckpt)->required()->check(CLI::ExistingFile);
  ev->add_option("--variant", ev_variant)->required();
  ev->add_option("--out", ev_out, "report CSV")->required();

  // aggregate
  auto* ag = app.add_subcommand("aggregate", "mean and STD over runs of per-run reports");
  std::vector<std::string> ag_in;
  std::string ag_out;
  ag->add_option("reports", ag_in)->required()->check(CLI::ExistingFile);
  ag->add_option("--out", ag_out)->required();

  // export-embeddings
  auto* ex = app.add_subcommand("export-embeddings", "pooled bottleneck features for visualisation");
  ConfigFlags ex_cfg;
  std::string ex_manifest, ex_ckpt, ex_out, ex_split = "test";
  ex_cfg.add(ex);
  ex->add_option("--manifest", ex_manifest)->required()->check(CLI::ExistingFile);
  ex->add_option("--ckpt", ex_ckpt)->required()->check(CLI::ExistingFile);
  ex->add_option("--split", ex_split)->capture_default_str();
  ex->add_option("--out", ex_out)->required();

  // verify
  auto* ver = app.add_subcommand("verify", "check config hash and master seed across a run directory");
  std::string ver_dir;
  std::optional<std::string> ver_config;
  ver->add_option("--dir", ver_dir)->required();
  ver->add_option("--config", ver_config, "also compare against this config");

  // run-study
  auto* study = app.add_subcommand("run-study", "every stage, every variant, every run");
  ConfigFlags study_cfg;
  std::optional<std::string> study_dir;
  study_cfg.add(study);
  study->add_option("--run-dir", study_dir, "override the config's run_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*desk) {
      synth::make_desk_corpus(desk_out, desk_opt);
      log_line("wrote desk corpus to " + desk_out);
    } else if (*sets_cmd) {
      fs::path base;
      if (!sets_config.empty()) {
        const auto cfg = config::load_run_config(sets_config);
        base = cfg.base_dir;
        auto from_cfg = cfg.ontology;
        if (!sets_in.judgments.empty()) from_cfg.judgments = sets_in.judgments;
        sets_in = from_cfg;
      }
      require(!sets_in.ontology.empty() && !sets_in.activity.empty(), ErrorCode::ConfigInvalid,
              "build-sets needs --ontology and --activity, or --config");
      const auto res = pipeline::build_sets(sets_in, base, sets_out);
      for (const auto& w : res.warnings) log_line("warning: " + w);
      log_line("wrote " + std::to_string(res.sets.size()) + " scene set(s) to " + sets_out);
    } else if (*syn) {
      const auto cfg = syn_cfg.load();
      const auto m = pipeline::synthesize(cfg, syn_sets, syn_out);
      log_line("wrote " + std::to_string(m.records.size()) + " pairs to " + syn_out);
    } else if (*pre) {
      const auto cfg = pre_cfg.load();
      const auto m = synth::load_manifest(pre_manifest);
      pipeline::check_config_hash(cfg, m.config_hash, "manifest");
      const auto train = pipeline::load_bank(cfg, m, "train");
      const auto val = pipeline::load_bank(cfg, m, "val");
      const auto out = pipeline::pretrain(cfg, train, val, pre_seed.value_or(cfg.seed), pre_out, log_line);
      log_line("best val accuracy " + std::to_string(out.result.best_val_accuracy) + " -> " +
               out.checkpoint.string());
    } else if (*tr) {
      const auto cfg = tr_cfg.load();
      const auto variant = train::parse_variant(tr_variant);
      const auto m = synth::load_manifest(tr_manifest);
      pipeline::check_config_hash(cfg, m.config_hash, "manifest");
      std::optional<fs::path> ctx;
      if (tr_context) ctx = *tr_context;
      pipeline::check_variant_inputs(variant, m, ctx);
      const auto train = pipeline::load_bank(cfg, m, "train");
      const auto val = pipeline::load_bank(cfg, m, "val");
      const auto out = pipeline::train_variant(cfg, train, val, variant, ctx, tr_seed.value_or(cfg.seed), tr_out,
                                               log_line);
      log_line("best val SI-SDR " + std::to_string(out.result.best_val_si_sdr) + " -> " + out.checkpoint.string());
    } else if (*ev) {
      const auto cfg = ev_cfg.load();
      const auto variant = train::parse_variant(ev_variant);
      const auto m = synth::load_manifest(ev_manifest);
      const auto test = pipeline::load_bank(cfg, m, "test");
      const auto report = pipeline::evaluate(cfg, test, ev_ckpt, variant, ev_out);
      for (const auto& r : report)
        if (r.scene == eval::kAllScenes)
          std::cout << r.variant << " SI-SDR " << r.si_sdr_mean << " dB, SDR " << r.sdr_mean << " dB\n";
    } else if (*ag) {
      std::vector<fs::path> paths(ag_in.begin(), ag_in.end());
      const auto report = pipeline::aggregate(paths, ag_out);
      for (const auto& r : report)
        if (r.scene == eval::kAllScenes)
          std::cout << r.variant << " SI-SDR " << r.si_sdr_mean << " +- " << r.si_sdr_std << " dB\n";
    } else if (*ex) {
      const auto cfg = ex_cfg.load();
      const auto m = synth::load_manifest(ex_manifest);
      const auto bank = pipeline::load_bank(cfg, m, ex_split);
      const double sil = pipeline::export_embeddings(cfg, bank, ex_ckpt, ex_out);
      std::cout << "silhouette " << sil << "\n";
    } else if (*ver) {
      std::optional<config::RunConfig> cfg;
      if (ver_config) cfg = config::load_run_config(*ver_config);
      const auto rep = pipeline::verify(ver_dir, cfg ? &*cfg : nullptr);
      for (const auto& p : rep.problems) std::cout << "MISMATCH " << p << "\n";
      std::cout << rep.artifacts << " artifact(s) checked, " << rep.problems.size() << " problem(s)\n";
      if (!rep.ok()) return kExitData;
    } else if (*study) {
      auto cfg = study_cfg.load();
      if (study_dir) cfg.run_dir = fs::absolute(*study_dir).string();
      const auto res = pipeline::run_study(cfg, log_line);
      for (const auto& r : res.summary)
        if (r.scene == eval::kAllScenes)
          std::cout << r.variant << " SI-SDR " << r.si_sdr_mean << " +- " << r.si_sdr_std << " dB\n";
    }
  } catch (const Error& e) {
    std::cerr << "acad: " << e.what() << "\n";
    return exit_code(classify(e.code()));
  } catch (const YAML::Exception& e) {
    std::cerr << "acad: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "acad: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "acad: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

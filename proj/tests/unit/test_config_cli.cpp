// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "acad/config/run_config.hpp"
#include "acad/core/csv.hpp"
#include "acad/pipeline/pipeline.hpp"
#include "acad/synth/desk_corpus.hpp"
#include "test_support.hpp"

using namespace acad;
using acad::testing::code_of;

TEST_CASE("full-scale defaults") {
  const auto cfg = config::parse_run_config("{}");
  CHECK(cfg.sample_rate == 22050);
  CHECK(cfg.stft.window_size == 1024);
  CHECK(cfg.stft.hop == 512);
  CHECK(cfg.n_mels == 64);
  CHECK(cfg.ontology.top_k == 20);
  CHECK(cfg.context.num_classes == 6);
  CHECK(cfg.context.fc1 == 64);
  CHECK(cfg.denoiser.depth == 3);
  CHECK(cfg.training.adam.lr == 1e-3);
  CHECK(cfg.training.lambda_asc == 1.0);
  CHECK(cfg.training.lambda_den == 1.0);
  CHECK(cfg.evaluation.runs == 5);
  CHECK(cfg.evaluation.variants.size() == 6);
  CHECK(cfg.synthesis.clip_seconds == 10.0);
}

TEST_CASE("config parsing rules") {
  CHECK(code_of([] { config::parse_run_config("seed: 1\nbogus: 2\n"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { config::parse_run_config("audio:\n  smaple_rate: 8000\n"); }) == ErrorCode::ConfigInvalid);
  const auto a = config::parse_run_config("seed: 3\n");
  const auto b = config::parse_run_config("seed: 3\n");
  const auto c = config::parse_run_config("seed: 4\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.synthesis.seed == 3);
  CHECK(a.training.seed == 3);
  CHECK(config::parse_run_config(a.canonical()).hash() == a.hash());
}

TEST_CASE("desk corpus config, set building and verification") {
  const auto dir = testing::scratch_dir("pipeline");
  synth::DeskCorpusOptions opt;
  opt.backgrounds_train = 2;
  opt.backgrounds_eval = 1;
  opt.events_train = 1;
  opt.events_eval = 1;
  synth::make_desk_corpus(dir, opt);
  const auto cfg = config::load_run_config(dir / "config.yaml");
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.sample_rate == 4000);

  // The desk corpus ships an empty judgments file, so refinement is skipped with a warning.
  const auto built = pipeline::build_sets(cfg.ontology, cfg.base_dir, dir / "sets.json");
  CHECK(built.sets.size() == 2);
  CHECK_FALSE(built.warnings.empty());
  CHECK(std::filesystem::exists(dir / "sets.warnings.json"));
  for (const auto& [scene, s] : built.sets) {
    CHECK_FALSE(s.ic.empty());
    CHECK_FALSE(s.oc.empty());
    for (const auto& id : s.ic) CHECK_FALSE(s.oc.contains(id));
  }

  write_text_file(dir / "reports" / "a.csv", pipeline::provenance_comment(cfg.hash(), cfg.seed) + "x\n1\n");
  auto report = pipeline::verify(dir / "reports", &cfg);
  CHECK(report.artifacts == 1);
  CHECK(report.ok());
  write_text_file(dir / "reports" / "b.csv", pipeline::provenance_comment("0000", cfg.seed) + "x\n1\n");
  report = pipeline::verify(dir / "reports", &cfg);
  CHECK(report.artifacts == 2);
  CHECK_FALSE(report.ok());
}

TEST_CASE("variant inputs are checked up front") {
  synth::DatasetManifest m;
  synth::ManifestRecord r;
  r.pair_id = "p";
  r.split = "train";
  m.records.push_back(r);
  CHECK(code_of([&] { pipeline::check_variant_inputs(train::Variant::Oracle, m, std::nullopt); }) ==
        ErrorCode::VariantInputMissing);
  CHECK(code_of([&] { pipeline::check_variant_inputs(train::Variant::FrozenAsc, m, std::nullopt); }) ==
        ErrorCode::VariantInputMissing);
  CHECK(code_of([&] {
          pipeline::check_variant_inputs(train::Variant::FrozenAsc, m, std::filesystem::path("/nonexistent.ckpt"));
        }) == ErrorCode::VariantInputMissing);
  CHECK_NOTHROW(pipeline::check_variant_inputs(train::Variant::Unconditioned, m, std::nullopt));
  CHECK_NOTHROW(pipeline::check_variant_inputs(train::Variant::ConstII, m, std::nullopt));
  m.records.front().scene_class = "park";
  CHECK_NOTHROW(pipeline::check_variant_inputs(train::Variant::Oracle, m, std::nullopt));
}

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acad/config/run_config.hpp"
#include "acad/eval/evaluate.hpp"
#include "acad/events/context_sets.hpp"
#include "acad/synth/dataset.hpp"
#include "acad/train/trainer.hpp"

namespace acad::pipeline {

namespace fs = std::filesystem;

/// Progress lines for long stages; may be empty.
using Logger = std::function<void(const std::string&)>;

/// Provenance line prepended to CSV artifacts; CSV readers skip it.
std::string provenance_comment(const std::string& config_hash, std::uint64_t master_seed);

struct BuildSetsResult {
  events::ContextEventSets sets;
  std::vector<std::string> warnings;
};

/// Loads ontology, activity (CSV, or JSONL frame tags by extension) and the
/// optional judgments, writes the sets JSON to `out` and, when there are
/// warnings, `<out stem>.warnings.json` next to it.
BuildSetsResult build_sets(const config::OntologyInputs& inputs, const fs::path& base_dir, const fs::path& out);

/// Renders the dataset of `cfg` into `out_dir` (audio/ and manifest.jsonl).
synth::DatasetManifest synthesize(const config::RunConfig& cfg, const fs::path& sets_path, const fs::path& out_dir);

/// Raises ConfigHashMismatch when an artifact was made under another config.
void check_config_hash(const config::RunConfig& cfg, const std::string& artifact_hash, const std::string& what);

train::FeatureBank load_bank(const config::RunConfig& cfg, const synth::DatasetManifest& manifest,
                             const std::string& split);

struct PretrainOutput {
  train::PretrainResult result;
  fs::path checkpoint;
};

/// Stage 1. Writes context.ckpt and pretrain_log.csv into `out_dir`.
PretrainOutput pretrain(const config::RunConfig& cfg, const train::FeatureBank& train, const train::FeatureBank& val,
                        std::uint64_t seed, const fs::path& out_dir, const Logger& log = {});

struct TrainOutput {
  train::DenoiserResult result;
  fs::path checkpoint;
};

/// Stage 2 for one variant. `context_ckpt` is required by the ASC variants.
/// Writes denoiser.ckpt and train_log.csv into `out_dir`.
TrainOutput train_variant(const config::RunConfig& cfg, const train::FeatureBank& train,
                          const train::FeatureBank& val, train::Variant variant,
                          const std::optional<fs::path>& context_ckpt, std::uint64_t seed, const fs::path& out_dir,
                          const Logger& log = {});

/// Checks the variant's inputs before any feature work: scene labels for the
/// label-conditioned variants, a context checkpoint for the ASC variants.
void check_variant_inputs(train::Variant variant, const synth::DatasetManifest& manifest,
                          const std::optional<fs::path>& context_ckpt);

/// Evaluates a stage-2 checkpoint on `test` and writes the report CSV.
eval::EvalReport evaluate(const config::RunConfig& cfg, const train::FeatureBank& test, const fs::path& ckpt,
                          train::Variant variant, const fs::path& out_csv);

/// Reads per-run report CSVs, aggregates them over runs and writes `out_csv`.
eval::EvalReport aggregate(const std::vector<fs::path>& reports, const fs::path& out_csv);

/// Writes the pooled bottleneck features of `bank` and returns their silhouette.
double export_embeddings(const config::RunConfig& cfg, const train::FeatureBank& bank, const fs::path& ckpt,
                         const fs::path& out_csv);

struct VerifyReport {
  std::size_t artifacts = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Re-checks that every WAV, manifest, checkpoint and CSV under `dir` carries
/// the same config hash and master seed (those of `cfg` when given).
VerifyReport verify(const fs::path& dir, const config::RunConfig* cfg = nullptr);

/// Seed of evaluation run `r`.
std::uint64_t run_seed(const config::RunConfig& cfg, std::size_t r);

struct RunRecord {
  std::uint64_t seed = 0;
  double pretrain_val_accuracy = 0.0;
  std::uint64_t frozen_hash_before = 0;
  std::uint64_t frozen_hash_after = 0;
  eval::EvalReport report;
};

struct StudyResult {
  fs::path root;
  std::vector<RunRecord> runs;
  eval::EvalReport summary;  // aggregated over runs
};

/// The whole pipeline into `cfg.resolve(cfg.run_dir)`:
/// sets.json, data/, runs/seed_<s>/{context,<variant>}/, reports/.
StudyResult run_study(const config::RunConfig& cfg, const Logger& log = {});

}  // namespace acad::pipeline

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acad/dsp/stft.hpp"
#include "acad/nn/context_extractor.hpp"
#include "acad/nn/denoiser.hpp"
#include "acad/synth/mix_spec.hpp"
#include "acad/train/features.hpp"
#include "acad/train/trainer.hpp"

namespace acad::config {

struct OntologyInputs {
  std::string ontology;   // JSON list of nodes
  std::string activity;   // CSV scene,event_id,active_seconds, or JSONL frame tags
  std::string judgments;  // optional CSV; empty skips refinement
  std::size_t top_k = 20;
  double frame_seconds = 1.0;  // JSONL activity only
};

struct PretrainSettings {
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
};

struct EvaluationSettings {
  std::size_t runs = 5;
  std::size_t batch_size = 32;
  std::vector<std::string> variants{"unconditioned", "frozen_asc", "finetuned_asc", "oracle", "const_I", "const_II"};
};

/// Every setting of a run. Defaults are the full-scale values; a config file
/// overrides any subset. Relative paths resolve against `base_dir`.
struct RunConfig {
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
  int sample_rate = 22050;
  dsp::StftConfig stft{};
  std::size_t n_mels = 64;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 means Nyquist
  OntologyInputs ontology;
  synth::SynthConfig synthesis;
  std::string catalogs;
  nn::ContextExtractorConfig context;
  nn::DenoiserConfig denoiser;
  PretrainSettings pretrain;
  train::TrainConfig training;
  EvaluationSettings evaluation;
  std::string run_dir = "run";

  void validate() const;
  /// Canonical YAML of every setting (paths as written).
  std::string canonical() const;
  /// FNV-1a of canonical(), hex.
  std::string hash() const;

  train::FeatureConfig features() const;
  std::filesystem::path resolve(const std::string& p) const;
};

RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace acad::config

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "acad/nn/checkpoint.hpp"
#include "acad/nn/context_extractor.hpp"
#include "acad/nn/denoiser.hpp"
#include "acad/train/features.hpp"
#include "acad/train/trainer.hpp"

namespace acad::eval {

inline constexpr const char* kNoisyInputVariant = "noisy_input";
inline constexpr const char* kAllScenes = "all";
inline constexpr const char* kAllRuns = "all";

struct PairMetrics {
  std::string pair_id;
  std::string scene;
  double si_sdr = 0.0;
  double sdr = 0.0;
};

struct EvalRow {
  std::string variant;
  std::string run;
  std::string scene;
  double si_sdr_mean = 0.0;
  double si_sdr_std = 0.0;
  double sdr_mean = 0.0;
  double sdr_std = 0.0;
};

using EvalReport = std::vector<EvalRow>;

/// Metrics of the raw mixture against the clean target; uses no model code.
std::vector<PairMetrics> noisy_input_metrics(const train::FeatureBank& bank);
/// Metrics of the enhanced signal for every item of `bank`.
std::vector<PairMetrics> model_metrics(nn::Denoiser& d, nn::ContextExtractor* c, train::Variant v,
                                       const train::FeatureBank& bank, std::size_t batch_size = 32);

/// One row per scene plus an overall row; STD is the population STD over pairs.
EvalReport summarize(const std::string& variant, const std::string& run, const std::vector<PairMetrics>& pairs);

/// Both models restored from a stage-2 checkpoint.
struct LoadedModels {
  nn::ModelCheckpoint checkpoint;
  train::Variant variant = train::Variant::Unconditioned;
  std::unique_ptr<nn::Denoiser> denoiser;
  std::unique_ptr<nn::ContextExtractor> context;  // null unless the variant uses C
};
LoadedModels load_models(const nn::ModelCheckpoint& ckpt);

/// Noisy-input rows followed by the model rows; raises VariantMismatch when
/// the checkpoint was trained for a different variant.
EvalReport evaluate_checkpoint(const train::FeatureBank& test, const nn::ModelCheckpoint& ckpt,
                               train::Variant requested, const std::string& run);

/// Mean and population STD over runs of the per-run means, per (variant, scene).
/// Needs at least two distinct runs per variant.
EvalReport aggregate_runs(const std::vector<EvalReport>& runs);

std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);

struct BottleneckRow {
  std::string pair_id;
  std::string scene;
  std::vector<double> features;
};

/// Spatially mean-pooled bottleneck activations, one row per item.
std::vector<BottleneckRow> export_bottleneck(nn::Denoiser& d, nn::ContextExtractor* c, train::Variant v,
                                             const train::FeatureBank& bank, std::size_t batch_size = 32);
std::string bottleneck_to_csv(const std::vector<BottleneckRow>& rows);
std::vector<BottleneckRow> bottleneck_from_csv(const std::string& text);
/// Silhouette of the scene labels over exported features.
double bottleneck_silhouette(const std::vector<BottleneckRow>& rows);

}  // namespace acad::eval

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "acad/nn/context_extractor.hpp"
#include "acad/nn/denoiser.hpp"
#include "acad/train/adam.hpp"
#include "acad/train/features.hpp"

namespace acad::train {

enum class Variant { Unconditioned, FrozenAsc, FinetunedAsc, Oracle, ConstI, ConstII };

inline const std::vector<Variant> kAllVariants{Variant::Unconditioned, Variant::FrozenAsc, Variant::FinetunedAsc,
                                               Variant::Oracle,        Variant::ConstI,    Variant::ConstII};

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
bool uses_context_model(Variant v);
bool uses_scene_labels(Variant v);
/// Conditioning size: 0 (no FiLM), the context embedding size, or K.
std::size_t embedding_dim(Variant v, std::size_t context_dim, std::size_t num_classes);

struct TrainConfig {
  std::size_t batch_size = 64;
  AdamConfig adam{};
  double lambda_asc = 1.0;
  double lambda_den = 1.0;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double grad_clip = 5.0;  // global L2 norm; 0 disables
  std::uint64_t seed = 0;
  Variant variant = Variant::Unconditioned;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::string split;
  double loss_total = 0.0;
  double loss_asc = 0.0;
  double loss_den = 0.0;
  double accuracy = 0.0;
  double si_sdr = 0.0;
};

std::string training_log_csv(const std::vector<EpochLog>& rows);

using EpochCallback = std::function<void(const EpochLog&)>;

struct PretrainResult {
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
};

/// Stage 1: trains C on clean log-mels; leaves C at its best-validation-accuracy state.
PretrainResult pretrain_context(nn::ContextExtractor& c, const FeatureBank& train, const FeatureBank& val,
                                const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Fraction of `bank` classified correctly by C from noisy or clean log-mels.
double context_accuracy(nn::ContextExtractor& c, const FeatureBank& bank, bool clean, std::size_t batch_size = 64);

struct DenoiserResult {
  double best_val_si_sdr = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
  std::uint64_t context_hash_before = 0;
  std::uint64_t context_hash_after = 0;
};

/// Stage 2: trains D (and C for the finetuned variant) and leaves them at
/// the best-validation-SI-SDR state. `c` is required for the ASC variants.
DenoiserResult train_denoiser(nn::Denoiser& d, nn::ContextExtractor* c, const FeatureBank& train,
                              const FeatureBank& val, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Conditioning vector for a batch, or an undefined tensor when unconditioned.
nn::Tensor conditioning(Variant v, nn::ContextExtractor* c, const FeatureBank& bank,
                        const std::vector<std::size_t>& idx, std::size_t const_dim, nn::Tensor* logits = nullptr);

/// Inference: enhanced waveforms [N, L] for the given items (eval mode, no graph).
nn::Tensor enhance(nn::Denoiser& d, nn::ContextExtractor* c, Variant v, const FeatureBank& bank,
                   const std::vector<std::size_t>& idx);

/// Batches of indices 0..n-1 in order.
std::vector<std::vector<std::size_t>> sequential_batches(std::size_t n, std::size_t batch_size);

}  // namespace acad::train

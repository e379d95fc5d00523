// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "acad/dsp/mel.hpp"
#include "acad/dsp/stft.hpp"
#include "acad/nn/tensor.hpp"
#include "acad/synth/dataset.hpp"

namespace acad::train {

struct FeatureConfig {
  int sample_rate = 22050;
  dsp::StftConfig stft{};
  std::size_t n_mels = 64;
  double fmin = 0.0;
  double fmax = 11025.0;
  /// Spectrogram axes are zero-padded to a multiple of this for the denoiser.
  std::size_t pad_multiple = 8;
};

/// Everything the two models and the metrics need for one pair, computed once.
struct PairFeatures {
  std::string pair_id;
  std::size_t scene_index = 0;
  dsp::ComplexSpectrogram noisy_spec;  // unpadded F x T
  std::vector<double> denoiser_input;  // |X~|, zero-padded to F' x T'
  std::vector<double> noisy_mel;       // M x T
  std::vector<double> clean_mel;       // M x T
  std::vector<double> clean;
  std::vector<double> noisy;
};

struct FeatureBank {
  FeatureConfig config;
  std::vector<std::string> scenes;  // label index -> scene name
  std::vector<PairFeatures> items;
  std::size_t bins = 0, frames = 0;                 // F, T
  std::size_t padded_bins = 0, padded_frames = 0;   // F', T'
  std::size_t samples = 0;

  std::size_t size() const { return items.size(); }
};

/// Loads the `split` records of `manifest` and precomputes their features.
/// `scenes` fixes the label order; an empty list means the manifest's sorted scenes.
FeatureBank extract_features(const synth::DatasetManifest& manifest, const std::string& split,
                             const FeatureConfig& cfg, std::vector<std::string> scenes = {});

/// Features for in-memory pairs (tests and tools).
PairFeatures make_pair_features(const std::string& pair_id, std::size_t scene_index,
                                const std::vector<double>& noisy, const std::vector<double>& clean,
                                const FeatureConfig& cfg, const dsp::MelFilterbank& fb);
FeatureBank make_bank(const FeatureConfig& cfg, std::vector<std::string> scenes, std::vector<PairFeatures> items);

// Batch assembly over item indices.
nn::Tensor batch_denoiser_input(const FeatureBank& bank, const std::vector<std::size_t>& idx);
nn::Tensor batch_mel(const FeatureBank& bank, const std::vector<std::size_t>& idx, bool clean);
nn::Tensor batch_clean(const FeatureBank& bank, const std::vector<std::size_t>& idx);
std::vector<std::size_t> batch_labels(const FeatureBank& bank, const std::vector<std::size_t>& idx);
/// One-hot [N, K] of the scene labels.
nn::Tensor batch_one_hot(const FeatureBank& bank, const std::vector<std::size_t>& idx);

/// Masked reconstruction x^ = istft(M * X~) with the noisy phase, for a batch.
/// mask [N, 1, F', T'] (only the leading F x T block is used) -> [N, L].
/// The gradient flows back to the mask through the inverse STFT.
nn::Tensor masked_istft(const nn::Tensor& mask, const FeatureBank& bank, const std::vector<std::size_t>& idx);

/// |X^| = |X~| * M on the unpadded block, for one batch item.
std::vector<double> masked_magnitude(const nn::Tensor& mask, std::size_t batch_index, const PairFeatures& item);

}  // namespace acad::train

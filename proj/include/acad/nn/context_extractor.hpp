// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acad/nn/layers.hpp"

namespace acad::nn {

struct ContextExtractorConfig {
  std::size_t n_mels = 64;
  std::size_t conv_blocks = 3;
  std::size_t first_block_channels = 8;
  std::size_t kernel = 3;
  std::size_t stride = 2;
  std::size_t rnn_hidden = 128;
  std::size_t fc1 = 64;
  std::size_t num_classes = 6;
  bool batch_norm = true;

  std::size_t embedding_dim() const { return fc1; }
  void validate() const;
  std::string fingerprint() const;
};

struct ContextOutput {
  Tensor logits;     // [N, K]
  Tensor embedding;  // [N, fc1], post-activation
};

/// CRNN scene classifier: residual conv blocks, GRU, temporal attention
/// pooling, then two fully connected layers. The first one's activations are
/// the context embedding.
class ContextExtractor : public Module {
 public:
  explicit ContextExtractor(ContextExtractorConfig cfg);

  const ContextExtractorConfig& config() const { return cfg_; }
  void init(std::uint64_t seed);

  /// x: [N, 1, n_mels, T] log-mel.
  ContextOutput forward(const Tensor& x);
  std::string fingerprint() const override { return cfg_.fingerprint(); }

  struct Block {
    ConvBn down;
    ConvBn same;
  };
  std::vector<Block>& blocks() { return blocks_; }

 private:
  ContextExtractorConfig cfg_;
  std::vector<Block> blocks_;
  Gru rnn_;
  AttentionPool pool_;
  Linear fc1_, fc2_;
};

}  // namespace acad::nn

namespace acad::nn {
/// Inverse of ContextExtractorConfig::fingerprint.
ContextExtractorConfig context_config_from_fingerprint(const std::string& fingerprint);
}  // namespace acad::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acad/nn/layers.hpp"

namespace acad::nn {

struct DenoiserConfig {
  std::size_t depth = 3;
  std::size_t first_encoder_channels = 16;
  std::size_t kernel = 3;
  std::size_t stride = 2;
  /// Size of the conditioning vector; 0 disables FiLM entirely.
  std::size_t film_embedding_dim = 64;
  bool batch_norm = true;

  bool conditioned() const { return film_embedding_dim > 0; }
  /// Spatial dims of the input must be multiples of this.
  std::size_t size_multiple() const;
  void validate() const;
  std::string fingerprint() const;
};

struct DenoiserOutput {
  Tensor mask;        // [N, 1, F, T], values in [0, 1]
  Tensor bottleneck;  // [N, C_b, F / 2^(depth+1), T / 2^(depth+1)]
};

/// UNet mask estimator with FiLM after every encoder and decoder conv.
class Denoiser : public Module {
 public:
  explicit Denoiser(DenoiserConfig cfg);

  const DenoiserConfig& config() const { return cfg_; }
  void init(std::uint64_t seed);

  /// x: [N, 1, F, T] (compressed magnitude); e: [N, E], or undefined when
  /// the model is unconditioned.
  DenoiserOutput forward(const Tensor& x, const Tensor& e);
  std::string fingerprint() const override { return cfg_.fingerprint(); }

 private:
  struct Encoder {
    ConvBn conv;
    FilmSite film;
  };
  struct Decoder {
    ConvBn conv;  // unit stride, halves channels after the skip concat
    FilmSite film;
    ConvTranspose2d up;
    BatchNorm2d up_bn;
  };

  DenoiserConfig cfg_;
  std::vector<Encoder> encoders_;
  ConvBn bottleneck_;
  ConvTranspose2d bottleneck_up_;
  BatchNorm2d bottleneck_up_bn_;
  std::vector<Decoder> decoders_;
  Conv2d head_;
};

}  // namespace acad::nn

namespace acad::nn {
/// Inverse of DenoiserConfig::fingerprint.
DenoiserConfig denoiser_config_from_fingerprint(const std::string& fingerprint);
}  // namespace acad::nn

// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/denoiser.hpp"

#include <json.hpp>

#include "acad/core/error.hpp"
#include "acad/nn/ops.hpp"

namespace acad::nn {

std::size_t DenoiserConfig::size_multiple() const {
  std::size_t m = 1;
  for (std::size_t i = 0; i < depth; ++i) m *= stride;
  return m;
}

void DenoiserConfig::validate() const {
  require(depth >= 1 && first_encoder_channels >= 1 && kernel % 2 == 1 && stride >= 2, ErrorCode::ConfigInvalid,
          "denoiser: invalid settings");
}

std::string DenoiserConfig::fingerprint() const {
  nlohmann::ordered_json j;
  j["model"] = "denoiser";
  j["depth"] = depth;
  j["first_encoder_channels"] = first_encoder_channels;
  j["kernel"] = kernel;
  j["stride"] = stride;
  j["film_embedding_dim"] = film_embedding_dim;
  j["batch_norm"] = batch_norm;
  return j.dump();
}

DenoiserConfig denoiser_config_from_fingerprint(const std::string& fingerprint) {
  try {
    const auto j = nlohmann::json::parse(fingerprint);
    require(j.at("model") == "denoiser", ErrorCode::FingerprintMismatch, "fingerprint is not a denoiser");
    DenoiserConfig c;
    c.depth = j.at("depth");
    c.first_encoder_channels = j.at("first_encoder_channels");
    c.kernel = j.at("kernel");
    c.stride = j.at("stride");
    c.film_embedding_dim = j.at("film_embedding_dim");
    c.batch_norm = j.at("batch_norm");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FingerprintMismatch, std::string("unreadable denoiser fingerprint: ") + e.what());
  }
}

Denoiser::Denoiser(DenoiserConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const bool bn = cfg_.batch_norm;
  const std::size_t k = cfg_.kernel, s = cfg_.stride, e = cfg_.film_embedding_dim;
  std::vector<std::size_t> ch(cfg_.depth);
  for (std::size_t i = 0; i < cfg_.depth; ++i) ch[i] = cfg_.first_encoder_channels << i;

  std::size_t cin = 1;
  for (std::size_t i = 0; i < cfg_.depth; ++i) {
    const std::string p = "enc" + std::to_string(i);
    Encoder enc{ConvBn(*this, p, cin, ch[i], k, s, bn), {}};
    if (e > 0) enc.film = FilmSite(*this, p + ".film", e, ch[i]);
    encoders_.push_back(std::move(enc));
    cin = ch[i];
  }
  const std::size_t deep = ch.back();
  bottleneck_ = ConvBn(*this, "bottleneck", deep, 2 * deep, k, s, bn);
  bottleneck_up_ = ConvTranspose2d(*this, "bottleneck.up", 2 * deep, deep, k, s, !bn);
  if (bn) bottleneck_up_bn_ = BatchNorm2d(*this, "bottleneck.up.bn", deep);

  for (std::size_t j = cfg_.depth; j-- > 0;) {
    const std::string p = "dec" + std::to_string(j);
    const std::size_t out = j > 0 ? ch[j - 1] : ch[0];
    Decoder dec{ConvBn(*this, p, 2 * ch[j], ch[j], k, 1, bn), {}, {}, {}};
    if (e > 0) dec.film = FilmSite(*this, p + ".film", e, ch[j]);
    dec.up = ConvTranspose2d(*this, p + ".up", ch[j], out, k, s, !bn);
    if (bn) dec.up_bn = BatchNorm2d(*this, p + ".up.bn", out);
    decoders_.push_back(std::move(dec));
  }
  head_ = Conv2d(*this, "head", ch[0], 1, k, 1, true);
}

void Denoiser::init(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "denoiser.init");
  for (auto& enc : encoders_) {
    enc.conv.init(rng);
    if (cfg_.conditioned()) enc.film.init();
  }
  bottleneck_.init(rng);
  bottleneck_up_.init(rng);
  for (auto& dec : decoders_) {
    dec.conv.init(rng);
    if (cfg_.conditioned()) dec.film.init();
    dec.up.init(rng);
  }
  head_.init(rng);
}

DenoiserOutput Denoiser::forward(const Tensor& x, const Tensor& e) {
  require(x.defined() && x.rank() == 4 && x.dim(1) == 1, ErrorCode::ShapeMismatch,
          "denoiser expects [N, 1, F, T], got " + (x.defined() ? shape_str(x.shape()) : std::string("undefined")));
  const std::size_t mult = cfg_.size_multiple();
  require(x.dim(2) % mult == 0 && x.dim(3) % mult == 0, ErrorCode::ShapeMismatch,
          "denoiser input " + shape_str(x.shape()) + " is not padded to a multiple of " + std::to_string(mult));
  if (cfg_.conditioned()) {
    require(e.defined() && e.rank() == 2 && e.dim(0) == x.dim(0) && e.dim(1) == cfg_.film_embedding_dim,
            ErrorCode::EmbeddingDimMismatch,
            "denoiser expects an embedding of [" + std::to_string(x.dim(0)) + ", " +
                std::to_string(cfg_.film_embedding_dim) + "], got " +
                (e.defined() ? shape_str(e.shape()) : std::string("none")));
  } else {
    require(!e.defined(), ErrorCode::EmbeddingDimMismatch, "unconditioned denoiser was given an embedding");
  }
  const bool train = training();
  auto modulate = [&](const FilmSite& site, const Tensor& h) { return cfg_.conditioned() ? site(h, e) : h; };

  std::vector<Tensor> skips;
  Tensor h = x;
  for (auto& enc : encoders_) {
    h = relu(modulate(enc.film, enc.conv(h, train)));
    skips.push_back(h);
  }
  DenoiserOutput out;
  out.bottleneck = relu(bottleneck_(h, train));
  const auto& deepest = skips.back();
  h = bottleneck_up_(out.bottleneck, deepest.dim(2), deepest.dim(3));
  if (cfg_.batch_norm) h = bottleneck_up_bn_(h, train);
  h = relu(h);

  for (std::size_t d = 0; d < decoders_.size(); ++d) {
    auto& dec = decoders_[d];
    const std::size_t level = cfg_.depth - 1 - d;
    h = relu(modulate(dec.film, dec.conv(concat_channels(h, skips[level]), train)));
    const std::size_t oh = level > 0 ? skips[level - 1].dim(2) : x.dim(2);
    const std::size_t ow = level > 0 ? skips[level - 1].dim(3) : x.dim(3);
    h = dec.up(h, oh, ow);
    if (cfg_.batch_norm) h = dec.up_bn(h, train);
    h = relu(h);
  }
  out.mask = sigmoid(head_(h));
  return out;
}

}  // namespace acad::nn

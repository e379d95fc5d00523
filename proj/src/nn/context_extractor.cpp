// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/context_extractor.hpp"

#include <json.hpp>

#include "acad/core/error.hpp"
#include "acad/nn/ops.hpp"

namespace acad::nn {

void ContextExtractorConfig::validate() const {
  require(conv_blocks >= 1 && first_block_channels >= 1 && kernel % 2 == 1 && stride >= 1, ErrorCode::ConfigInvalid,
          "context extractor: invalid conv settings");
  require(rnn_hidden >= 1 && fc1 >= 1 && num_classes >= 2, ErrorCode::ConfigInvalid,
          "context extractor: invalid head sizes");
  std::size_t div = 1;
  for (std::size_t i = 0; i < conv_blocks; ++i) div *= stride;
  require(n_mels % div == 0, ErrorCode::ConfigInvalid,
          "context extractor: mel bands must be divisible by " + std::to_string(div));
}

std::string ContextExtractorConfig::fingerprint() const {
  nlohmann::ordered_json j;
  j["model"] = "context_extractor";
  j["n_mels"] = n_mels;
  j["conv_blocks"] = conv_blocks;
  j["first_block_channels"] = first_block_channels;
  j["kernel"] = kernel;
  j["stride"] = stride;
  j["rnn_hidden"] = rnn_hidden;
  j["fc1"] = fc1;
  j["num_classes"] = num_classes;
  j["batch_norm"] = batch_norm;
  return j.dump();
}

ContextExtractorConfig context_config_from_fingerprint(const std::string& fingerprint) {
  try {
    const auto j = nlohmann::json::parse(fingerprint);
    require(j.at("model") == "context_extractor", ErrorCode::FingerprintMismatch,
            "fingerprint is not a context extractor");
    ContextExtractorConfig c;
    c.n_mels = j.at("n_mels");
    c.conv_blocks = j.at("conv_blocks");
    c.first_block_channels = j.at("first_block_channels");
    c.kernel = j.at("kernel");
    c.stride = j.at("stride");
    c.rnn_hidden = j.at("rnn_hidden");
    c.fc1 = j.at("fc1");
    c.num_classes = j.at("num_classes");
    c.batch_norm = j.at("batch_norm");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FingerprintMismatch, std::string("unreadable context extractor fingerprint: ") + e.what());
  }
}

ContextExtractor::ContextExtractor(ContextExtractorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  std::size_t cin = 1, ch = cfg_.first_block_channels, freq = cfg_.n_mels;
  for (std::size_t i = 0; i < cfg_.conv_blocks; ++i) {
    const std::string p = "block" + std::to_string(i);
    Block b{ConvBn(*this, p + ".down", cin, ch, cfg_.kernel, cfg_.stride, cfg_.batch_norm),
            ConvBn(*this, p + ".same", ch, ch, cfg_.kernel, 1, cfg_.batch_norm)};
    blocks_.push_back(std::move(b));
    cin = ch;
    freq /= cfg_.stride;
    if (i + 1 < cfg_.conv_blocks) ch *= 2;
  }
  rnn_ = Gru(*this, "rnn", cin * freq, cfg_.rnn_hidden);
  pool_ = AttentionPool(*this, "pool", cfg_.rnn_hidden);
  fc1_ = Linear(*this, "fc1", cfg_.rnn_hidden, cfg_.fc1);
  fc2_ = Linear(*this, "fc2", cfg_.fc1, cfg_.num_classes);
}

void ContextExtractor::init(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "context_extractor.init");
  for (auto& b : blocks_) {
    b.down.init(rng);
    b.same.init(rng);
  }
  rnn_.init(rng);
  pool_.init(rng);
  fc1_.init(rng);
  fc2_.init(rng);
}

ContextOutput ContextExtractor::forward(const Tensor& x) {
  require(x.defined() && x.rank() == 4 && x.dim(1) == 1 && x.dim(2) == cfg_.n_mels, ErrorCode::ShapeMismatch,
          "context extractor expects [N, 1, " + std::to_string(cfg_.n_mels) + ", T], got " +
              (x.defined() ? shape_str(x.shape()) : std::string("undefined")));
  Tensor h = x;
  for (auto& b : blocks_) {
    h = relu(b.down(h, training()));
    h = relu(add(h, b.same(h, training())));
  }
  const auto states = rnn_(to_sequence(h));
  const auto pooled = pool_(states);
  ContextOutput out;
  out.embedding = relu(fc1_(pooled));
  out.logits = fc2_(out.embedding);
  return out;
}

}  // namespace acad::nn

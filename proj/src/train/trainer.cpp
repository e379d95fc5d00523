// SPDX-License-Identifier: Apache-2.0
#include "acad/train/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "acad/core/error.hpp"
#include "acad/eval/metrics.hpp"
#include "acad/nn/ops.hpp"
#include "acad/train/losses.hpp"

namespace acad::train {

using nn::Tensor;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Unconditioned: return "unconditioned";
    case Variant::FrozenAsc: return "frozen_asc";
    case Variant::FinetunedAsc: return "finetuned_asc";
    case Variant::Oracle: return "oracle";
    case Variant::ConstI: return "const_I";
    case Variant::ConstII: return "const_II";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (auto v : kAllVariants)
    if (to_string(v) == name) return v;
  fail(ErrorCode::ConfigInvalid, "unknown variant '" + name +
                                     "' (expected unconditioned, frozen_asc, finetuned_asc, oracle, const_I, const_II)");
}

bool uses_context_model(Variant v) { return v == Variant::FrozenAsc || v == Variant::FinetunedAsc; }
bool uses_scene_labels(Variant v) { return v == Variant::Oracle || v == Variant::FinetunedAsc; }

std::size_t embedding_dim(Variant v, std::size_t context_dim, std::size_t num_classes) {
  switch (v) {
    case Variant::Unconditioned: return 0;
    case Variant::FrozenAsc:
    case Variant::FinetunedAsc:
    case Variant::ConstI: return context_dim;
    case Variant::Oracle:
    case Variant::ConstII: return num_classes;
  }
  return 0;
}

std::string training_log_csv(const std::vector<EpochLog>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,split,loss_total,loss_asc,loss_den,accuracy,si_sdr\n";
  for (const auto& r : rows)
    os << r.epoch << ',' << r.split << ',' << r.loss_total << ',' << r.loss_asc << ',' << r.loss_den << ','
       << r.accuracy << ',' << r.si_sdr << '\n';
  return os.str();
}

std::vector<std::vector<std::size_t>> sequential_batches(std::size_t n, std::size_t batch_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch_size) {
    std::vector<std::size_t> b(std::min(batch_size, n - s));
    std::iota(b.begin(), b.end(), s);
    out.push_back(std::move(b));
  }
  return out;
}

namespace {

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch_size) {
    // A trailing batch of one would leave batch norm with a single sample per
    // channel in the deepest context layers; fold it into the previous batch.
    if (n - s == 1 && !out.empty()) {
      out.back().push_back(order[s]);
      break;
    }
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + batch_size)));
  }
  return out;
}

std::vector<std::vector<double>> save_state(const nn::Module& m) {
  std::vector<std::vector<double>> out;
  for (const auto& s : m.state()) out.push_back(s.tensor.data());
  return out;
}

void load_state(nn::Module& m, const std::vector<std::vector<double>>& values) {
  const auto& st = m.state();
  for (std::size_t i = 0; i < st.size(); ++i) {
    auto t = st[i].tensor;
    t.data() = values[i];
  }
}

void check_bank(const FeatureBank& bank, const char* what) {
  require(bank.size() > 0, ErrorCode::EmptyDataset, std::string(what) + " split has no pairs");
}

std::size_t count_correct(const Tensor& logits, const std::vector<std::size_t>& labels) {
  const std::size_t k = logits.dim(1);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* z = logits.data().data() + i * k;
    if (static_cast<std::size_t>(std::max_element(z, z + k) - z) == labels[i]) ++ok;
  }
  return ok;
}

double mean_val_si_sdr(nn::Denoiser& d, nn::ContextExtractor* c, Variant v, const FeatureBank& val,
                       std::size_t batch_size) {
  double total = 0.0;
  for (const auto& idx : sequential_batches(val.size(), batch_size)) {
    const auto est = enhance(d, c, v, val, idx);
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const auto& ref = val.items[idx[n]].clean;
      total += eval::si_sdr(ref, std::span<const double>(est.data().data() + n * val.samples, val.samples));
    }
  }
  return total / static_cast<double>(val.size());
}

}  // namespace

double context_accuracy(nn::ContextExtractor& c, const FeatureBank& bank, bool clean, std::size_t batch_size) {
  check_bank(bank, "evaluation");
  nn::NoGradGuard guard;
  const bool was_training = c.training();
  c.set_training(false);
  std::size_t ok = 0;
  for (const auto& idx : sequential_batches(bank.size(), batch_size))
    ok += count_correct(c.forward(batch_mel(bank, idx, clean)).logits, batch_labels(bank, idx));
  c.set_training(was_training);
  return static_cast<double>(ok) / static_cast<double>(bank.size());
}

PretrainResult pretrain_context(nn::ContextExtractor& c, const FeatureBank& train, const FeatureBank& val,
                                const TrainConfig& cfg, const EpochCallback& on_epoch) {
  check_bank(train, "training");
  check_bank(val, "validation");
  require(c.config().num_classes == train.scenes.size(), ErrorCode::ShapeMismatch,
          "context extractor has " + std::to_string(c.config().num_classes) + " classes but the data has " +
              std::to_string(train.scenes.size()) + " scenes");
  c.set_trainable(true);
  Adam opt(c.parameters(), cfg.adam);
  Rng rng = Rng::derive(cfg.seed, "pretrain.shuffle");
  PretrainResult result;
  auto best = save_state(c);
  double best_acc = -1.0;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    c.set_training(true);
    double loss_sum = 0.0;
    std::size_t ok = 0;
    for (const auto& idx : shuffled_batches(train.size(), cfg.batch_size, rng)) {
      opt.zero_grad();
      const auto labels = batch_labels(train, idx);
      const auto out = c.forward(batch_mel(train, idx, true));
      auto loss = cross_entropy(out.logits, labels);
      loss.backward();
      if (cfg.grad_clip > 0.0) opt.clip_grad_norm(cfg.grad_clip);
      opt.step();
      loss_sum += loss.item() * static_cast<double>(idx.size());
      ok += count_correct(out.logits, labels);
    }
    EpochLog tr{epoch, "train", loss_sum / static_cast<double>(train.size()), 0.0, 0.0,
                static_cast<double>(ok) / static_cast<double>(train.size()), 0.0};
    tr.loss_asc = tr.loss_total;

    // Validation loss and accuracy on clean inputs.
    EpochLog va{epoch, "val", 0.0, 0.0, 0.0, 0.0, 0.0};
    {
      nn::NoGradGuard guard;
      c.set_training(false);
      std::size_t vok = 0;
      double vloss = 0.0;
      for (const auto& idx : sequential_batches(val.size(), cfg.batch_size)) {
        const auto labels = batch_labels(val, idx);
        const auto out = c.forward(batch_mel(val, idx, true));
        vloss += cross_entropy(out.logits, labels).item() * static_cast<double>(idx.size());
        vok += count_correct(out.logits, labels);
      }
      va.loss_total = va.loss_asc = vloss / static_cast<double>(val.size());
      va.accuracy = static_cast<double>(vok) / static_cast<double>(val.size());
    }
    result.log.push_back(tr);
    result.log.push_back(va);
    if (on_epoch) {
      on_epoch(tr);
      on_epoch(va);
    }
    if (va.accuracy > best_acc) {
      best_acc = va.accuracy;
      result.best_epoch = epoch;
      best = save_state(c);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  load_state(c, best);
  c.set_training(false);
  result.best_val_accuracy = best_acc;
  return result;
}

Tensor conditioning(Variant v, nn::ContextExtractor* c, const FeatureBank& bank, const std::vector<std::size_t>& idx,
                    std::size_t const_dim, Tensor* logits) {
  switch (v) {
    case Variant::Unconditioned: return {};
    case Variant::FrozenAsc: {
      nn::NoGradGuard guard;
      const bool was = c->training();
      c->set_training(false);
      auto out = c->forward(batch_mel(bank, idx, false));
      c->set_training(was);
      if (logits) *logits = out.logits;
      return out.embedding;
    }
    case Variant::FinetunedAsc: {
      auto out = c->forward(batch_mel(bank, idx, false));
      if (logits) *logits = out.logits;
      return out.embedding;
    }
    case Variant::Oracle: return batch_one_hot(bank, idx);
    case Variant::ConstI:
    case Variant::ConstII: return Tensor::full({idx.size(), const_dim}, 1.0);
  }
  return {};
}

namespace {

std::size_t const_dim_for(Variant v, const nn::Denoiser& d) {
  return v == Variant::ConstI || v == Variant::ConstII ? d.config().film_embedding_dim : 0;
}

void check_variant_inputs(Variant v, nn::ContextExtractor* c, const nn::Denoiser& d, const FeatureBank& bank) {
  if (uses_context_model(v))
    require(c != nullptr, ErrorCode::VariantInputMissing, to_string(v) + " needs a pretrained context checkpoint");
  if (uses_scene_labels(v))
    for (const auto& it : bank.items)
      require(it.scene_index < bank.scenes.size(), ErrorCode::VariantInputMissing,
              to_string(v) + " needs scene labels; " + it.pair_id + " has none");
  const std::size_t context_dim = c ? c->config().embedding_dim() : d.config().film_embedding_dim;
  const std::size_t want = embedding_dim(v, context_dim, bank.scenes.size());
  require(d.config().film_embedding_dim == want, ErrorCode::EmbeddingDimMismatch,
          to_string(v) + " needs a denoiser with embedding size " + std::to_string(want) + ", got " +
              std::to_string(d.config().film_embedding_dim));
}

}  // namespace

Tensor enhance(nn::Denoiser& d, nn::ContextExtractor* c, Variant v, const FeatureBank& bank,
               const std::vector<std::size_t>& idx) {
  nn::NoGradGuard guard;
  const bool d_was = d.training();
  const bool c_was = c ? c->training() : false;
  d.set_training(false);
  if (c) c->set_training(false);
  const auto e = conditioning(v == Variant::FinetunedAsc ? Variant::FrozenAsc : v, c, bank, idx, const_dim_for(v, d));
  const auto mask = d.forward(batch_denoiser_input(bank, idx), e).mask;
  auto out = masked_istft(mask, bank, idx);
  d.set_training(d_was);
  if (c) c->set_training(c_was);
  return out;
}

DenoiserResult train_denoiser(nn::Denoiser& d, nn::ContextExtractor* c, const FeatureBank& train,
                              const FeatureBank& val, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  const Variant v = cfg.variant;
  check_variant_inputs(v, c, d, train);
  check_bank(train, "training");
  check_bank(val, "validation");
  nn::ContextExtractor* ctx = uses_context_model(v) ? c : nullptr;

  DenoiserResult result;
  if (ctx) result.context_hash_before = ctx->state_hash();
  d.set_trainable(true);
  auto params = d.parameters();
  if (v == Variant::FinetunedAsc) {
    ctx->set_trainable(true);
    for (auto& p : ctx->parameters()) params.push_back(p);
  } else if (ctx) {
    ctx->set_trainable(false);
    ctx->set_training(false);
  }
  Adam opt(params, cfg.adam);
  Rng rng = Rng::derive(cfg.seed, "denoiser.shuffle");
  const std::size_t const_dim = const_dim_for(v, d);

  auto best_d = save_state(d);
  std::vector<std::vector<double>> best_c;
  if (v == Variant::FinetunedAsc) best_c = save_state(*ctx);
  double best = -1e300;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    d.set_training(true);
    if (v == Variant::FinetunedAsc) ctx->set_training(true);
    EpochLog tr{epoch, "train", 0.0, 0.0, 0.0, 0.0, 0.0};
    std::size_t ok = 0;
    for (const auto& idx : shuffled_batches(train.size(), cfg.batch_size, rng)) {
      opt.zero_grad();
      Tensor logits;
      const auto e = conditioning(v, ctx, train, idx, const_dim, &logits);
      const auto mask = d.forward(batch_denoiser_input(train, idx), e).mask;
      const auto estimate = masked_istft(mask, train, idx);
      const auto l_den = si_snr_loss(batch_clean(train, idx), estimate);
      Tensor total = l_den;
      double asc = 0.0;
      if (v == Variant::FinetunedAsc) {
        const auto labels = batch_labels(train, idx);
        const auto l_asc = cross_entropy(logits, labels);
        total = joint_loss(l_asc, l_den, cfg.lambda_asc, cfg.lambda_den);
        asc = l_asc.item();
        ok += count_correct(logits, labels);
      }
      total.backward();
      if (cfg.grad_clip > 0.0) opt.clip_grad_norm(cfg.grad_clip);
      opt.step();
      const auto w = static_cast<double>(idx.size());
      tr.loss_total += total.item() * w;
      tr.loss_asc += asc * w;
      tr.loss_den += l_den.item() * w;
    }
    const auto n = static_cast<double>(train.size());
    tr.loss_total /= n;
    tr.loss_asc /= n;
    tr.loss_den /= n;
    tr.accuracy = v == Variant::FinetunedAsc ? static_cast<double>(ok) / n : 0.0;

    EpochLog va{epoch, "val", 0.0, 0.0, 0.0, 0.0, 0.0};
    va.si_sdr = mean_val_si_sdr(d, ctx, v, val, cfg.batch_size);
    va.loss_den = va.loss_total = -va.si_sdr;
    if (ctx) va.accuracy = context_accuracy(*ctx, val, false, cfg.batch_size);
    result.log.push_back(tr);
    result.log.push_back(va);
    if (on_epoch) {
      on_epoch(tr);
      on_epoch(va);
    }
    if (va.si_sdr > best) {
      best = va.si_sdr;
      result.best_epoch = epoch;
      best_d = save_state(d);
      if (v == Variant::FinetunedAsc) best_c = save_state(*ctx);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  load_state(d, best_d);
  d.set_training(false);
  if (v == Variant::FinetunedAsc) {
    load_state(*ctx, best_c);
    ctx->set_training(false);
  }
  if (ctx) result.context_hash_after = ctx->state_hash();
  result.best_val_si_sdr = best;
  return result;
}

}  // namespace acad::train

// SPDX-License-Identifier: Apache-2.0
#include "acad/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/eval/metrics.hpp"
#include "acad/nn/ops.hpp"

namespace acad::eval {

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size()));
  return m;
}

std::string scene_name(const train::FeatureBank& bank, const train::PairFeatures& it) {
  return it.scene_index < bank.scenes.size() ? bank.scenes[it.scene_index] : std::string();
}

}  // namespace

std::vector<PairMetrics> noisy_input_metrics(const train::FeatureBank& bank) {
  std::vector<PairMetrics> out;
  for (const auto& it : bank.items)
    out.push_back({it.pair_id, scene_name(bank, it), si_sdr(it.clean, it.noisy), sdr(it.clean, it.noisy)});
  return out;
}

std::vector<PairMetrics> model_metrics(nn::Denoiser& d, nn::ContextExtractor* c, train::Variant v,
                                       const train::FeatureBank& bank, std::size_t batch_size) {
  std::vector<PairMetrics> out;
  for (const auto& idx : train::sequential_batches(bank.size(), batch_size)) {
    const auto est = train::enhance(d, c, v, bank, idx);
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const auto& it = bank.items[idx[n]];
      const std::span<const double> e(est.data().data() + n * bank.samples, bank.samples);
      out.push_back({it.pair_id, scene_name(bank, it), si_sdr(it.clean, e), sdr(it.clean, e)});
    }
  }
  return out;
}

EvalReport summarize(const std::string& variant, const std::string& run, const std::vector<PairMetrics>& input) {
  require(!input.empty(), ErrorCode::EmptyDataset, "no pairs to summarise");
  // Canonical order so the floating-point sums do not depend on evaluation order.
  auto pairs = input;
  std::sort(pairs.begin(), pairs.end(), [](const PairMetrics& a, const PairMetrics& b) { return a.pair_id < b.pair_id; });
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_scene;
  std::vector<double> all_si, all_sdr;
  for (const auto& p : pairs) {
    by_scene[p.scene].first.push_back(p.si_sdr);
    by_scene[p.scene].second.push_back(p.sdr);
    all_si.push_back(p.si_sdr);
    all_sdr.push_back(p.sdr);
  }
  EvalReport report;
  for (const auto& [scene, v] : by_scene) {
    const auto a = moments(v.first), b = moments(v.second);
    report.push_back({variant, run, scene, a.mean, a.std, b.mean, b.std});
  }
  const auto a = moments(all_si), b = moments(all_sdr);
  report.push_back({variant, run, kAllScenes, a.mean, a.std, b.mean, b.std});
  return report;
}

LoadedModels load_models(const nn::ModelCheckpoint& ckpt) {
  require(ckpt.meta.stage == nn::kStageDenoiser && ckpt.has_module("denoiser"), ErrorCode::VariantMismatch,
          "checkpoint is not a denoiser checkpoint (stage " + ckpt.meta.stage + ")");
  LoadedModels m;
  m.checkpoint = ckpt;
  m.variant = train::parse_variant(ckpt.meta.variant);
  m.denoiser = std::make_unique<nn::Denoiser>(nn::denoiser_config_from_fingerprint(ckpt.fingerprints.at("denoiser")));
  nn::restore(*m.denoiser, ckpt, "denoiser");
  m.denoiser->set_training(false);
  if (train::uses_context_model(m.variant)) {
    require(ckpt.has_module("context"), ErrorCode::VariantInputMissing,
            "checkpoint for " + ckpt.meta.variant + " lacks the context extractor");
    m.context =
        std::make_unique<nn::ContextExtractor>(nn::context_config_from_fingerprint(ckpt.fingerprints.at("context")));
    nn::restore(*m.context, ckpt, "context");
    m.context->set_training(false);
  }
  return m;
}

EvalReport evaluate_checkpoint(const train::FeatureBank& test, const nn::ModelCheckpoint& ckpt,
                               train::Variant requested, const std::string& run) {
  require(ckpt.meta.variant == train::to_string(requested), ErrorCode::VariantMismatch,
          "checkpoint was trained as " + ckpt.meta.variant + ", not " + train::to_string(requested));
  auto models = load_models(ckpt);
  auto report = summarize(kNoisyInputVariant, run, noisy_input_metrics(test));
  const auto rows = summarize(train::to_string(requested), run,
                              model_metrics(*models.denoiser, models.context.get(), requested, test));
  report.insert(report.end(), rows.begin(), rows.end());
  return report;
}

EvalReport aggregate_runs(const std::vector<EvalReport>& runs) {
  // (variant, scene) -> run -> row
  std::map<std::pair<std::string, std::string>, std::map<std::string, EvalRow>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& report : runs)
    for (const auto& row : report) {
      const auto key = std::make_pair(row.variant, row.scene);
      if (!groups.count(key)) order.push_back(key);
      groups[key][row.run] = row;
    }
  require(!order.empty(), ErrorCode::InsufficientRuns, "no reports to aggregate");
  EvalReport out;
  for (const auto& key : order) {
    const auto& by_run = groups[key];
    require(by_run.size() >= 2, ErrorCode::InsufficientRuns,
            key.first + " has " + std::to_string(by_run.size()) + " run(s); at least 2 are needed");
    std::vector<double> si, sd;
    for (const auto& [run, row] : by_run) {
      si.push_back(row.si_sdr_mean);
      sd.push_back(row.sdr_mean);
    }
    const auto a = moments(si), b = moments(sd);
    out.push_back({key.first, kAllRuns, key.second, a.mean, a.std, b.mean, b.std});
  }
  return out;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "variant,run,scene,si_sdr_mean,si_sdr_std,sdr_mean,sdr_std\n";
  for (const auto& r : report)
    os << r.variant << ',' << r.run << ',' << r.scene << ',' << r.si_sdr_mean << ',' << r.si_sdr_std << ','
       << r.sdr_mean << ',' << r.sdr_std << '\n';
  return os.str();
}

EvalReport report_from_csv(const std::string& text) {
  const auto table = parse_csv(text);
  const auto c_var = table.column("variant"), c_run = table.column("run"), c_scene = table.column("scene"),
             c_sm = table.column("si_sdr_mean"), c_ss = table.column("si_sdr_std"), c_dm = table.column("sdr_mean"),
             c_ds = table.column("sdr_std");
  EvalReport out;
  for (const auto& r : table.rows) {
    try {
      out.push_back({r.at(c_var), r.at(c_run), r.at(c_scene), std::stod(r.at(c_sm)), std::stod(r.at(c_ss)),
                     std::stod(r.at(c_dm)), std::stod(r.at(c_ds))});
    } catch (const std::exception& e) {
      fail(ErrorCode::MalformedContainer, std::string("bad report row: ") + e.what());
    }
  }
  return out;
}

std::vector<BottleneckRow> export_bottleneck(nn::Denoiser& d, nn::ContextExtractor* c, train::Variant v,
                                             const train::FeatureBank& bank, std::size_t batch_size) {
  nn::NoGradGuard guard;
  d.set_training(false);
  if (c) c->set_training(false);
  const std::size_t const_dim =
      v == train::Variant::ConstI || v == train::Variant::ConstII ? d.config().film_embedding_dim : 0;
  std::vector<BottleneckRow> rows;
  for (const auto& idx : train::sequential_batches(bank.size(), batch_size)) {
    const auto e = train::conditioning(v == train::Variant::FinetunedAsc ? train::Variant::FrozenAsc : v, c, bank,
                                       idx, const_dim);
    const auto pooled = nn::spatial_mean(d.forward(train::batch_denoiser_input(bank, idx), e).bottleneck);
    const std::size_t width = pooled.dim(1);
    for (std::size_t n = 0; n < idx.size(); ++n) {
      const auto& it = bank.items[idx[n]];
      rows.push_back({it.pair_id, scene_name(bank, it),
                      std::vector<double>(pooled.data().begin() + static_cast<std::ptrdiff_t>(n * width),
                                          pooled.data().begin() + static_cast<std::ptrdiff_t>((n + 1) * width))});
    }
  }
  return rows;
}

std::string bottleneck_to_csv(const std::vector<BottleneckRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "pair_id,scene_class";
  const std::size_t width = rows.empty() ? 0 : rows.front().features.size();
  for (std::size_t k = 0; k < width; ++k) os << ",f" << k;
  os << '\n';
  for (const auto& r : rows) {
    os << r.pair_id << ',' << r.scene;
    for (double v : r.features) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

std::vector<BottleneckRow> bottleneck_from_csv(const std::string& text) {
  const auto table = parse_csv(text);
  std::vector<BottleneckRow> rows;
  for (const auto& r : table.rows) {
    require(r.size() >= 2, ErrorCode::MalformedContainer, "bottleneck row too short");
    BottleneckRow row{r[0], r[1], {}};
    for (std::size_t k = 2; k < r.size(); ++k) row.features.push_back(std::stod(r[k]));
    rows.push_back(std::move(row));
  }
  return rows;
}

double bottleneck_silhouette(const std::vector<BottleneckRow>& rows) {
  std::map<std::string, int> ids;
  std::vector<std::vector<double>> pts;
  std::vector<int> labels;
  for (const auto& r : rows) {
    const auto [it, inserted] = ids.emplace(r.scene, static_cast<int>(ids.size()));
    labels.push_back(it->second);
    pts.push_back(r.features);
  }
  return silhouette_score(pts, labels);
}

}  // namespace acad::eval

// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common/gradcheck.hpp"
#include "../common/toy_sets.hpp"
#include "acad/audio/loudness.hpp"
#include "acad/config/run_config.hpp"
#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/core/rng.hpp"
#include "acad/dsp/stft.hpp"
#include "acad/eval/metrics.hpp"
#include "acad/events/context_sets.hpp"
#include "acad/nn/checkpoint.hpp"
#include "acad/pipeline/pipeline.hpp"
#include "acad/synth/desk_corpus.hpp"
#include "acad/synth/mix_spec.hpp"
#include "acad/synth/render.hpp"
#include "acad/train/losses.hpp"

namespace fs = std::filesystem;
using namespace acad;

namespace {

// Tolerances.
constexpr double kIstftMaxError = 1e-6;
constexpr double kSineLufs = -3.01;
constexpr double kSineLufsTol = 0.1;
constexpr double kSnrCalibrationLu = 0.3;
constexpr std::size_t kCalibrationPairs = 200;
constexpr double kMetricTol = 1e-6;
constexpr std::size_t kGradShapes = 20;
constexpr double kMinGainOverNoisyDb = 3.0;
constexpr double kOracleMarginDb = 0.3;
constexpr double kMinPretrainAccuracy = 0.9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << std::fixed << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

// 1: reconstruction, loudness calibration and event SNR calibration.
Outcome dsp_oracles(const fs::path& corpus, const config::RunConfig& cfg) {
  double worst_istft = 0.0;
  Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(4096, 40000));
    std::vector<double> x(n);
    for (double& v : x) v = 0.3 * rng.normal();
    const audio::AudioClip clip(x, 22050);
    const auto back = dsp::istft(dsp::stft(clip, {}));
    for (std::size_t j = 0; j < n; ++j) worst_istft = std::max(worst_istft, std::abs(back.samples()[j] - x[j]));
  }

  std::vector<double> sine(48000 * 6);
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2.0 * std::numbers::pi * 997.0 * i / 48000.0);
  const double lufs = audio::integrated_loudness(audio::AudioClip(sine, 48000)).value;

  const auto built = pipeline::build_sets(cfg.ontology, cfg.base_dir, corpus / "calibration_sets.json");
  const auto catalogs = synth::load_catalogs(cfg.resolve(cfg.catalogs));
  const auto& catalog = catalogs.split("train");
  const synth::SourceLibrary sources(catalogs.root, cfg.synthesis.sample_rate);
  const auto rate = cfg.synthesis.sample_rate;
  double worst_snr = 0.0;
  std::size_t events = 0;
  std::vector<std::string> scenes;
  for (const auto& [s, sets] : built.sets) scenes.push_back(s);
  for (std::size_t p = 0; p < kCalibrationPairs; ++p) {
    const auto spec = synth::sample_mix_spec(Rng::derive_seed(99, "calibration" + std::to_string(p)),
                                             scenes[p % scenes.size()], catalog, built.sets, cfg.synthesis);
    const auto pair = synth::render_pair(spec, sources, cfg.synthesis);
    for (std::size_t k = 0; k < spec.events.size(); ++k) {
      const auto& e = spec.events[k];
      const auto& canvas = pair.events[k].samples();
      const auto start = static_cast<std::size_t>(std::llround(e.start_s * rate));
      const auto stop = std::min(canvas.size(), start + static_cast<std::size_t>(std::llround(e.dur_s * rate)));
      const audio::AudioClip placed(
          std::vector<double>(canvas.begin() + static_cast<std::ptrdiff_t>(start),
                              canvas.begin() + static_cast<std::ptrdiff_t>(stop)),
          rate);
      const double measured = audio::integrated_loudness(placed).value - spec.background_lufs;
      worst_snr = std::max(worst_snr, std::abs(measured - e.snr_db));
      ++events;
    }
  }

  const bool ok = worst_istft < kIstftMaxError && std::abs(lufs - kSineLufs) <= kSineLufsTol &&
                  worst_snr <= kSnrCalibrationLu;
  return {ok, "istft max err " + sci(worst_istft) + ", 997 Hz sine " + fmt(lufs) +
                  " LUFS, worst event SNR error " + sci(worst_snr) + " LU over " + std::to_string(events) +
                  " events in " + std::to_string(kCalibrationPairs) + " pairs"};
}

// 2: metric oracles.
Outcome metric_oracles() {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  Rng rng(5);
  std::vector<double> x(2000), y(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + 0.2 * rng.normal();
  }
  const double base = eval::si_sdr(x, y);
  for (double a : {0.01, 0.5, 3.0, 1000.0}) {
    std::vector<double> scaled(y);
    for (double& v : scaled) v *= a;
    expect(std::abs(eval::si_sdr(x, scaled) - base) < 1e-9, "si_sdr scale invariance");
  }
  expect(std::abs(eval::sdr(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 0.0}) - 10.0 * std::log10(4.0)) <
             kMetricTol,
         "sdr 6.02 dB case");
  expect(std::abs(eval::sdr(x, std::vector<double>(x.size(), 0.0))) < kMetricTol, "zero-estimate sdr");
  const double projection = train::si_snr_loss(nn::Tensor::from({1, 2}, {1.0, 0.0}),
                                               nn::Tensor::from({1, 2}, {1.0, 1.0}), false)
                                .item();
  expect(std::abs(projection) < kMetricTol, "0 dB projection case");
  expect(eval::si_sdr(std::vector<double>{1.0, -1.0}, std::vector<double>{1.0, 1.0}) == -eval::kMetricCapDb,
         "orthogonal floor");
  expect(eval::si_sdr(x, x) == eval::kMetricCapDb, "perfect estimate cap");
  std::string detail = "base SI-SDR " + fmt(base) + " dB";
  for (const auto& b : bad) detail += "; failed " + b;
  return {bad.empty(), detail};
}

// 3: finite-difference gradients.
Outcome gradient_suite() {
  bool ok = true;
  std::string detail;
  double worst = 0.0;
  for (const auto& r : gradcheck::run_suite(kGradShapes, 77)) {
    ok = ok && r.worst < gradcheck::kTolerance && r.shapes >= kGradShapes;
    worst = std::max(worst, r.worst);
    if (r.worst >= gradcheck::kTolerance) detail += " " + r.op + "=" + sci(r.worst);
  }
  // Both losses.
  Rng rng(78);
  double ce = 0.0, snr = 0.0;
  for (std::size_t k = 0; k < kGradShapes; ++k) {
    const auto n = gradcheck::pick(rng, 1, 4), classes = gradcheck::pick(rng, 2, 6);
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = gradcheck::pick(rng, 0, classes - 1);
    ce = std::max(ce, gradcheck::check([&](auto& in) { return train::cross_entropy(in[0], labels); },
                                       {gradcheck::random_tensor({n, classes}, rng)}, rng));
    const auto len = gradcheck::pick(rng, 8, 64);
    const auto ref = gradcheck::random_tensor({n, len}, rng);
    ref.node()->requires_grad = false;
    snr = std::max(snr, gradcheck::check([&](auto& in) { return train::si_snr_loss(ref, in[0]); },
                                         {gradcheck::random_tensor({n, len}, rng)}, rng));
  }
  ok = ok && ce < gradcheck::kTolerance && snr < gradcheck::kTolerance;
  return {ok, "worst layer rel err " + sci(worst) + ", cross entropy " + sci(ce) +
                  ", si-snr " + sci(snr) + " over " + std::to_string(kGradShapes) + " shapes each" +
                  detail};
}

// 4: set construction against the brute-force oracle.
Outcome set_oracle() {
  const auto ont = toy::make_ontology(toy::toy_edges());
  const toy::Oracle oracle(toy::toy_edges());
  const auto table = toy::toy_activity();
  std::size_t cases = 0, mismatches = 0, overlaps = 0;
  Rng rng(4);
  for (std::size_t k = 1; k <= 6; ++k) {
    std::map<std::string, std::set<std::string>> top;
    for (const auto& s : table.scenes()) {
      const auto t = events::top_k(table, s, k);
      top[s] = {t.begin(), t.end()};
    }
    const auto got = events::build_preliminary_sets(table, ont, k);
    const auto want = oracle.build(top);
    ++cases;
    for (const auto& [scene, s] : want)
      if (got.at(scene).ic != s.ic || got.at(scene).oc != s.oc) ++mismatches;

    // Random valid judgments: an IC event and one of its ancestors in OC.
    for (int round = 0; round < 20; ++round) {
      events::RefinementJudgments js;
      for (const auto& [scene, s] : got)
        for (const auto& ic : s.ic)
          for (const auto& oc : s.oc)
            if (ont.is_ancestor(oc, ic) && rng.uniform() < 0.5)
              js.push_back({scene, ic, oc, static_cast<events::Verdict>(rng.uniform_int(0, 2))});
      const auto refined = events::apply_refinement(got, js, ont);
      const auto expected = oracle.refine(got, js);
      ++cases;
      for (const auto& [scene, s] : expected) {
        if (refined.at(scene).ic != s.ic || refined.at(scene).oc != s.oc) ++mismatches;
        for (const auto& id : refined.at(scene).ic) overlaps += refined.at(scene).oc.count(id);
      }
    }
    for (const auto& [scene, s] : got)
      for (const auto& id : s.ic) overlaps += s.oc.count(id);
  }

  const auto tree = events::parse_ontology(R"([{"id":"animal","name":"Animal","child_ids":["bird","dog"]},
                                               {"id":"bird","name":"Bird"},{"id":"dog","name":"Dog"}])");
  const auto pruned = events::prune_coactive_parents({{"animal", "bird", "dog"}}, tree);
  const bool example = pruned.size() == 1 && pruned[0] == events::EventSet{"bird", "dog"};

  return {mismatches == 0 && overlaps == 0 && example,
          std::to_string(cases) + " cases, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(overlaps) + " IC/OC overlaps, Bird/Dog pruning example " + (example ? "kept {bird, dog}" : "wrong")};
}

double overall_mean(const eval::EvalReport& summary, const std::string& variant) {
  for (const auto& r : summary)
    if (r.variant == variant && r.scene == eval::kAllScenes) return r.si_sdr_mean;
  fail(ErrorCode::EmptyDataset, "summary has no overall row for " + variant);
}

// 5: directional reproduction of the variant ordering.
Outcome desk_study(const pipeline::StudyResult& study) {
  const auto& s = study.summary;
  const double noisy = overall_mean(s, eval::kNoisyInputVariant);
  std::map<std::string, double> m;
  for (const auto* v : {"unconditioned", "frozen_asc", "finetuned_asc", "oracle", "const_I", "const_II"})
    m[v] = overall_mean(s, v);
  bool a = true;
  for (const auto& [v, x] : m) a = a && x >= noisy + kMinGainOverNoisyDb;
  const bool b = m["oracle"] >= m["unconditioned"] + kOracleMarginDb;
  const bool c = m["finetuned_asc"] >= m["frozen_asc"];
  const double informative = std::min({m["frozen_asc"], m["finetuned_asc"], m["oracle"]});
  const bool d = std::max(m["const_I"], m["const_II"]) <= informative;
  std::string detail = "noisy " + fmt(noisy, 2);
  for (const auto& [v, x] : m) detail += ", " + v + " " + fmt(x, 2);
  detail += std::string(" (a ") + (a ? "ok" : "no") + ", b " + (b ? "ok" : "no") + ", c " + (c ? "ok" : "no") +
            ", d " + (d ? "ok" : "no") + "; " + std::to_string(study.runs.size()) + " seeds)";
  return {a && b && c && d, detail};
}

// 6: stage-1 accuracy.
Outcome pretrain_accuracy(const pipeline::StudyResult& study) {
  bool ok = !study.runs.empty();
  std::string detail = "val accuracy";
  for (const auto& r : study.runs) {
    ok = ok && r.pretrain_val_accuracy > kMinPretrainAccuracy;
    detail += " seed " + std::to_string(r.seed) + "=" + fmt(r.pretrain_val_accuracy);
  }
  return {ok, detail};
}

// 7: frozen context untouched, by hash and by stored values.
Outcome frozen_contract(const pipeline::StudyResult& study) {
  bool ok = !study.runs.empty();
  std::size_t compared = 0;
  for (const auto& r : study.runs) {
    ok = ok && r.frozen_hash_before == r.frozen_hash_after && r.frozen_hash_before != 0;
    const auto dir = study.root / "runs" / ("seed_" + std::to_string(r.seed));
    const auto pre = nn::load_checkpoint(dir / "context" / "context.ckpt");
    const auto post = nn::load_checkpoint(dir / "frozen_asc" / "denoiser.ckpt");
    for (const auto& [key, t] : pre.tensors) {
      const auto it = post.tensors.find(key);
      ok = ok && it != post.tensors.end() && it->second.shape == t.shape && it->second.values == t.values;
      ++compared;
    }
  }
  return {ok, std::to_string(compared) + " context tensors compared bitwise across " +
                  std::to_string(study.runs.size()) + " seeds"};
}

// 8: two studies from the same master seed.
Outcome reproducibility(const pipeline::StudyResult& a, const pipeline::StudyResult& b) {
  bool ok = read_text_file(a.root / "data" / "manifest.jsonl") == read_text_file(b.root / "data" / "manifest.jsonl");
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(a.root / "reports")) {
    if (e.path().extension() != ".csv") continue;
    const auto other = b.root / "reports" / e.path().filename();
    ok = ok && fs::exists(other) && read_text_file(e.path()) == read_text_file(other);
    ++csvs;
  }
  std::size_t other_csvs = 0;
  for (const auto& e : fs::directory_iterator(b.root / "reports")) other_csvs += e.path().extension() == ".csv";
  ok = ok && csvs > 0 && csvs == other_csvs;
  return {ok, "manifest " + std::string(ok ? "identical" : "compared") + ", " + std::to_string(csvs) +
                  " metric CSVs compared byte for byte"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string work = "acceptance_work";
  bool skip_study = false;
  app.add_option("--work-dir", work, "scratch directory (recreated)");
  app.add_flag("--skip-study", skip_study, "run only the fast criteria; the study criteria report FAIL");
  CLI11_PARSE(app, argc, argv);

  const fs::path root = fs::absolute(work);
  fs::remove_all(root);
  fs::create_directories(root);
  auto progress = [](const std::string& line) { std::cerr << "[acceptance] " << line << std::endl; };

  // Two independent copies of the desk corpus; the config uses relative paths,
  // so both hash identically.
  synth::DeskCorpusOptions opt;
  synth::make_desk_corpus(root / "a", opt);
  synth::make_desk_corpus(root / "b", opt);
  const auto cfg_a = config::load_run_config(root / "a" / "config.yaml");
  const auto cfg_b = config::load_run_config(root / "b" / "config.yaml");

  std::vector<Outcome> results(8);
  results[0] = guarded([&] { return dsp_oracles(root / "a", cfg_a); });
  results[1] = guarded(metric_oracles);
  results[2] = guarded(gradient_suite);
  results[3] = guarded(set_oracle);

  std::optional<pipeline::StudyResult> study_a, study_b;
  std::string study_error = "skipped";
  if (!skip_study) try {
    progress("desk study, first run");
    study_a = pipeline::run_study(cfg_a, progress);
    progress("desk study, second run");
    study_b = pipeline::run_study(cfg_b, progress);
  } catch (const std::exception& e) {
    study_error = std::string("study failed: ") + e.what();
  }
  auto need = [&](const std::function<Outcome()>& fn, bool both = false) {
    if (!study_a || (both && !study_b)) return Outcome{false, study_error};
    return guarded(fn);
  };
  results[4] = need([&] { return desk_study(*study_a); });
  results[5] = need([&] { return pretrain_accuracy(*study_a); });
  results[6] = need([&] { return frozen_contract(*study_a); });
  results[7] = need([&] { return reproducibility(*study_a, *study_b); }, true);

  const char* names[] = {"dsp oracles",     "metric oracles",     "gradient suite",    "set-construction oracle",
                         "desk study",      "context pretraining", "frozen context",    "reproducibility"};
  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, results[i].pass ? "PASS" : "FAIL", names[i],
                results[i].detail.c_str());
    failed += !results[i].pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}

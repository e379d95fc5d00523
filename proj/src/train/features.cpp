// SPDX-License-Identifier: Apache-2.0
#include "acad/train/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "acad/audio/resample.hpp"
#include "acad/audio/wav.hpp"
#include "acad/core/error.hpp"

namespace acad::train {

using nn::Tensor;

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

audio::AudioClip load_at_rate(const std::filesystem::path& path, int rate) {
  auto clip = audio::read_wav(path);
  return clip.sample_rate() == rate ? clip : audio::resample(clip, rate);
}

}  // namespace

PairFeatures make_pair_features(const std::string& pair_id, std::size_t scene_index,
                                const std::vector<double>& noisy, const std::vector<double>& clean,
                                const FeatureConfig& cfg, const dsp::MelFilterbank& fb) {
  require(noisy.size() == clean.size(), ErrorCode::DimensionMismatch,
          pair_id + ": noisy and clean lengths differ");
  PairFeatures p;
  p.pair_id = pair_id;
  p.scene_index = scene_index;
  p.noisy = noisy;
  p.clean = clean;
  const audio::AudioClip noisy_clip(noisy, cfg.sample_rate);
  p.noisy_spec = dsp::stft(noisy_clip, cfg.stft);
  auto [mag, phase] = dsp::polar_split(p.noisy_spec);
  p.noisy_mel = dsp::log_mel(mag, fb).values;
  const auto clean_spec = dsp::stft(audio::AudioClip(clean, cfg.sample_rate), cfg.stft);
  p.clean_mel = dsp::log_mel(dsp::polar_split(clean_spec).first, fb).values;

  auto [padded, rec] = dsp::pad_to_multiple(mag, cfg.pad_multiple);
  p.denoiser_input = std::move(padded.values);
  return p;
}

FeatureBank make_bank(const FeatureConfig& cfg, std::vector<std::string> scenes, std::vector<PairFeatures> items) {
  FeatureBank bank;
  bank.config = cfg;
  bank.scenes = std::move(scenes);
  bank.items = std::move(items);
  if (!bank.items.empty()) {
    const auto& first = bank.items.front();
    bank.bins = first.noisy_spec.num_bins;
    bank.frames = first.noisy_spec.num_frames;
    bank.padded_bins = round_up(bank.bins, cfg.pad_multiple);
    bank.padded_frames = round_up(bank.frames, cfg.pad_multiple);
    bank.samples = first.clean.size();
    for (const auto& it : bank.items)
      require(it.clean.size() == bank.samples, ErrorCode::DimensionMismatch,
              "all clips in a feature bank must have the same length (" + it.pair_id + ")");
  }
  return bank;
}

FeatureBank extract_features(const synth::DatasetManifest& manifest, const std::string& split,
                             const FeatureConfig& cfg, std::vector<std::string> scenes) {
  if (scenes.empty()) scenes = manifest.scenes();
  const auto records = manifest.split(split);
  const dsp::MelFilterbank fb(static_cast<std::size_t>(cfg.stft.bins()), cfg.n_mels, cfg.fmin, cfg.fmax,
                              cfg.sample_rate);
  std::vector<PairFeatures> items(records.size());
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto& r = *records[static_cast<std::size_t>(i)];
      const auto scene = std::find(scenes.begin(), scenes.end(), r.scene_class);
      require(scene != scenes.end(), ErrorCode::UnknownScene, r.pair_id + ": scene " + r.scene_class);
      const auto noisy = load_at_rate(manifest.resolve(r.noisy_path), cfg.sample_rate);
      const auto clean = load_at_rate(manifest.resolve(r.clean_path), cfg.sample_rate);
      items[static_cast<std::size_t>(i)] =
          make_pair_features(r.pair_id, static_cast<std::size_t>(scene - scenes.begin()), noisy.samples(),
                             clean.samples(), cfg, fb);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return make_bank(cfg, std::move(scenes), std::move(items));
}

Tensor batch_denoiser_input(const FeatureBank& bank, const std::vector<std::size_t>& idx) {
  const std::size_t plane = bank.padded_bins * bank.padded_frames;
  std::vector<double> v;
  v.reserve(idx.size() * plane);
  for (auto i : idx) v.insert(v.end(), bank.items.at(i).denoiser_input.begin(), bank.items.at(i).denoiser_input.end());
  return Tensor::from({idx.size(), 1, bank.padded_bins, bank.padded_frames}, std::move(v));
}

Tensor batch_mel(const FeatureBank& bank, const std::vector<std::size_t>& idx, bool clean) {
  std::vector<double> v;
  for (auto i : idx) {
    const auto& m = clean ? bank.items.at(i).clean_mel : bank.items.at(i).noisy_mel;
    v.insert(v.end(), m.begin(), m.end());
  }
  return Tensor::from({idx.size(), 1, bank.config.n_mels, bank.frames}, std::move(v));
}

Tensor batch_clean(const FeatureBank& bank, const std::vector<std::size_t>& idx) {
  std::vector<double> v;
  v.reserve(idx.size() * bank.samples);
  for (auto i : idx) v.insert(v.end(), bank.items.at(i).clean.begin(), bank.items.at(i).clean.end());
  return Tensor::from({idx.size(), bank.samples}, std::move(v));
}

std::vector<std::size_t> batch_labels(const FeatureBank& bank, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  for (auto i : idx) out.push_back(bank.items.at(i).scene_index);
  return out;
}

Tensor batch_one_hot(const FeatureBank& bank, const std::vector<std::size_t>& idx) {
  const std::size_t k = bank.scenes.size();
  std::vector<double> v(idx.size() * k, 0.0);
  for (std::size_t n = 0; n < idx.size(); ++n) v[n * k + bank.items.at(idx[n]).scene_index] = 1.0;
  return Tensor::from({idx.size(), k}, std::move(v));
}

Tensor masked_istft(const Tensor& mask, const FeatureBank& bank, const std::vector<std::size_t>& idx) {
  require(mask.defined() && mask.rank() == 4 && mask.dim(0) == idx.size() && mask.dim(1) == 1 &&
              mask.dim(2) >= bank.bins && mask.dim(3) >= bank.frames,
          ErrorCode::ShapeMismatch, "masked_istft: mask shape does not cover the spectrogram");
  const std::size_t n = idx.size(), fp = mask.dim(2), tp = mask.dim(3), f = bank.bins, t = bank.frames,
                    len = bank.samples;
  std::vector<double> out(n * len);
  for (std::size_t i = 0; i < n; ++i) {
    auto spec = bank.items.at(idx[i]).noisy_spec;
    const double* m = mask.data().data() + i * fp * tp;
    for (std::size_t a = 0; a < f; ++a)
      for (std::size_t b = 0; b < t; ++b) spec.at(a, b) *= m[a * tp + b];
    const auto clip = dsp::istft(spec);
    std::copy(clip.samples().begin(), clip.samples().end(), out.begin() + static_cast<std::ptrdiff_t>(i * len));
  }
  const FeatureBank* bp = &bank;
  return nn::make_result({n, len}, std::move(out), {mask}, [bp, idx, n, fp, tp, f, t, len](nn::Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& spec = bp->items.at(idx[i]).noisy_spec;
      const std::vector<double> gy(self.grad.begin() + static_cast<std::ptrdiff_t>(i * len),
                                   self.grad.begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
      const auto gb = dsp::istft_adjoint(gy, spec);
      double* gm = g.data() + i * fp * tp;
      // Y = M X with X fixed: dL/dM = Re(conj(X) G)
      for (std::size_t a = 0; a < f; ++a)
        for (std::size_t b = 0; b < t; ++b) gm[a * tp + b] += std::real(std::conj(spec.at(a, b)) * gb[a * t + b]);
    }
  });
}

std::vector<double> masked_magnitude(const Tensor& mask, std::size_t batch_index, const PairFeatures& item) {
  const std::size_t fp = mask.dim(2), tp = mask.dim(3);
  const auto& spec = item.noisy_spec;
  std::vector<double> out(spec.num_bins * spec.num_frames);
  const double* m = mask.data().data() + batch_index * fp * tp;
  for (std::size_t a = 0; a < spec.num_bins; ++a)
    for (std::size_t b = 0; b < spec.num_frames; ++b)
      out[a * spec.num_frames + b] = std::abs(spec.at(a, b)) * m[a * tp + b];
  return out;
}

}  // namespace acad::train

// SPDX-License-Identifier: Apache-2.0
#include "acad/synth/render.hpp"

#include <algorithm>
#include <cmath>

#include "acad/audio/loudness.hpp"
#include "acad/audio/resample.hpp"
#include "acad/audio/wav.hpp"

namespace acad::synth {

SourceLibrary::SourceLibrary(std::filesystem::path root, int sample_rate)
    : root_(std::move(root)), sample_rate_(sample_rate) {
  require(sample_rate > 0, ErrorCode::InvalidArgument, "source library rate must be positive");
}

std::shared_ptr<const audio::AudioClip> SourceLibrary::get(const std::string& ref) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(ref); it != cache_.end()) return it->second;
  }
  auto clip = std::make_shared<const audio::AudioClip>(audio::resample(load(ref), sample_rate_));
  std::lock_guard lock(mutex_);
  return cache_.emplace(ref, std::move(clip)).first->second;
}

audio::AudioClip SourceLibrary::load(const std::string& ref) const { return audio::read_wav(root_ / ref); }

audio::AudioClip MemorySourceLibrary::load(const std::string& ref) const {
  auto it = clips_.find(ref);
  if (it == clips_.end()) fail(ErrorCode::IoFailure, "no in-memory source '" + ref + "'");
  return it->second;
}

namespace {

void apply_fades(std::vector<double>& x, std::size_t fade) {
  fade = std::min(fade, x.size() / 2);
  for (std::size_t i = 0; i < fade; ++i) {
    const double g = static_cast<double>(i) / static_cast<double>(fade);
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

}  // namespace

RenderedPair render_pair(const MixSpec& spec, const SourceLibrary& sources, const SynthConfig& cfg) {
  const int rate = cfg.sample_rate;
  require(sources.sample_rate() == rate, ErrorCode::InvalidArgument, "source library rate differs from config");
  const std::size_t len = cfg.clip_samples();

  const auto bg = sources.get(spec.background);
  const auto offset = static_cast<std::size_t>(std::llround(spec.background_offset_s * rate));
  std::vector<double> segment(len, 0.0);
  for (std::size_t i = 0; i < len && offset + i < bg->size(); ++i) segment[i] = bg->samples()[offset + i];
  audio::AudioClip segment_clip(std::move(segment), rate);
  if (audio::integrated_loudness(segment_clip).is_silent())
    fail(ErrorCode::SilentSource, "background '" + spec.background + "' is silent");
  audio::AudioClip clean = audio::gain_to_loudness(segment_clip, {spec.background_lufs});

  std::vector<double> noisy = clean.samples();
  std::vector<audio::AudioClip> placed;
  placed.reserve(spec.events.size());
  const auto fade = static_cast<std::size_t>(std::llround(cfg.fade_seconds * rate));
  for (const auto& e : spec.events) {
    const auto src = sources.get(e.source);
    const auto n = static_cast<std::size_t>(std::llround(e.dur_s * rate));
    if (src->size() < n)
      fail(ErrorCode::SourceTooShort, "event source '" + e.source + "' is shorter than " +
                                          std::to_string(e.dur_s) + " s");
    std::vector<double> trimmed(src->samples().begin(), src->samples().begin() + static_cast<std::ptrdiff_t>(n));
    apply_fades(trimmed, fade);
    audio::AudioClip event_clip(std::move(trimmed), rate);
    if (audio::integrated_loudness(event_clip).is_silent())
      fail(ErrorCode::SilentSource, "event source '" + e.source + "' is silent");
    const auto scaled = audio::gain_to_loudness(event_clip, {spec.background_lufs + e.snr_db});

    std::vector<double> canvas(len, 0.0);
    const auto start = static_cast<std::size_t>(std::llround(e.start_s * rate));
    for (std::size_t i = 0; i < scaled.size() && start + i < len; ++i) canvas[start + i] = scaled.samples()[i];
    for (std::size_t i = 0; i < len; ++i) noisy[i] += canvas[i];
    placed.emplace_back(std::move(canvas), rate);
  }

  const bool clipped = std::any_of(noisy.begin(), noisy.end(), [](double v) { return std::abs(v) > 1.0; });
  return RenderedPair{audio::AudioClip(std::move(noisy), rate), std::move(clean), std::move(placed), clipped};
}

}  // namespace acad::synth

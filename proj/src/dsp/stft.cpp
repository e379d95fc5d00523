// SPDX-License-Identifier: Apache-2.0
#include "acad/dsp/stft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "acad/dsp/fft.hpp"

namespace acad::dsp {

namespace {

const RealFft& shared_fft(int size) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<RealFft>(size);
  return *slot;
}

// Reflect-mode index into [0, n) for any integer position ("reflect" excludes
// the edge sample from the mirror).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

// Sum over frames of the squared window at every padded position.
std::vector<double> window_power_envelope(const std::vector<double>& w, int hop,
                                          std::size_t frames) {
  const std::size_t n = w.size();
  std::vector<double> env((frames - 1) * hop + n, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t m = 0; m < n; ++m) env[t * hop + m] += w[m] * w[m];
  return env;
}

constexpr double kEnvelopeFloor = 1e-10;

}  // namespace

void StftConfig::validate() const {
  require(window_size >= 2, ErrorCode::InvalidArgument, "window size must be >= 2");
  require(hop >= 1 && hop <= window_size, ErrorCode::InvalidArgument, "hop must be in [1, window]");
}

std::size_t StftConfig::frames(std::size_t length) const {
  if (center_pad) return length / static_cast<std::size_t>(hop) + 1;
  if (length < static_cast<std::size_t>(window_size)) return 0;
  return (length - static_cast<std::size_t>(window_size)) / static_cast<std::size_t>(hop) + 1;
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(cfg.window_size));
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / cfg.window_size);
  return w;
}

ComplexSpectrogram stft(const audio::AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t len = clip.size();
  const auto n = static_cast<std::size_t>(cfg.window_size);
  if (!cfg.center_pad && len < n)
    fail(ErrorCode::ClipTooShort, "clip of " + std::to_string(len) + " samples is shorter than the window");

  const std::size_t frames = cfg.frames(len);
  const std::size_t bins = static_cast<std::size_t>(cfg.bins());
  const std::ptrdiff_t offset = cfg.center_pad ? static_cast<std::ptrdiff_t>(n / 2) : 0;
  const auto& x = clip.samples();
  const auto window = analysis_window(cfg);
  const RealFft& fft = shared_fft(cfg.window_size);

  ComplexSpectrogram spec;
  spec.bins.assign(bins * frames, {0.0, 0.0});
  spec.num_bins = bins;
  spec.num_frames = frames;
  spec.config = cfg;
  spec.original_length = len;
  spec.sample_rate = clip.sample_rate();

#pragma omp parallel
  {
    std::vector<double> frame(n);
    std::vector<std::complex<double>> out(bins);
#pragma omp for schedule(static)
    for (std::size_t t = 0; t < frames; ++t) {
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * cfg.hop) - offset;
      for (std::size_t m = 0; m < n; ++m) {
        const std::ptrdiff_t i = start + static_cast<std::ptrdiff_t>(m);
        const double v = cfg.center_pad ? x[reflect_index(i, len)] : x[static_cast<std::size_t>(i)];
        frame[m] = v * window[m];
      }
      fft.forward(frame, out);
      for (std::size_t f = 0; f < bins; ++f) spec.bins[f * frames + t] = out[f];
    }
  }
  return spec;
}

audio::AudioClip istft(const ComplexSpectrogram& spec) {
  const StftConfig& cfg = spec.config;
  const auto n = static_cast<std::size_t>(cfg.window_size);
  const std::size_t frames = spec.num_frames;
  const std::size_t bins = spec.num_bins;
  require(bins == static_cast<std::size_t>(cfg.bins()) && spec.bins.size() == bins * frames,
          ErrorCode::DimensionMismatch, "spectrogram inconsistent with its config");
  require(frames >= 1 && spec.original_length >= 1, ErrorCode::DimensionMismatch, "empty spectrogram");

  const auto window = analysis_window(cfg);
  const RealFft& fft = shared_fft(cfg.window_size);
  const auto env = window_power_envelope(window, cfg.hop, frames);
  std::vector<double> padded(env.size(), 0.0);

  std::vector<std::complex<double>> column(bins);
  std::vector<double> frame(n);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) column[f] = spec.bins[f * frames + t];
    fft.inverse(column, frame);
    for (std::size_t m = 0; m < n; ++m) padded[t * cfg.hop + m] += frame[m] * window[m];
  }

  const std::size_t offset = cfg.center_pad ? n / 2 : 0;
  std::vector<double> out(spec.original_length, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t p = i + offset;
    if (p < padded.size() && env[p] > kEnvelopeFloor) out[i] = padded[p] / env[p];
  }
  return audio::AudioClip(std::move(out), spec.sample_rate > 0 ? spec.sample_rate : 1);
}

std::vector<std::complex<double>> istft_adjoint(const std::vector<double>& grad_samples,
                                                const ComplexSpectrogram& like) {
  const StftConfig& cfg = like.config;
  const auto n = static_cast<std::size_t>(cfg.window_size);
  const std::size_t frames = like.num_frames;
  const std::size_t bins = like.num_bins;
  require(grad_samples.size() == like.original_length, ErrorCode::DimensionMismatch,
          "adjoint input length differs from original_length");

  const auto window = analysis_window(cfg);
  const RealFft& fft = shared_fft(cfg.window_size);
  const auto env = window_power_envelope(window, cfg.hop, frames);
  const std::size_t offset = cfg.center_pad ? n / 2 : 0;

  // Adjoint of crop followed by envelope normalisation.
  std::vector<double> padded(env.size(), 0.0);
  for (std::size_t i = 0; i < grad_samples.size(); ++i) {
    const std::size_t p = i + offset;
    if (p < padded.size() && env[p] > kEnvelopeFloor) padded[p] = grad_samples[i] / env[p];
  }

  std::vector<std::complex<double>> grad(bins * frames);
  std::vector<double> frame(n);
  std::vector<std::complex<double>> column(bins);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < n; ++m) frame[m] = padded[t * cfg.hop + m] * window[m];
    fft.forward(frame, column);
    for (std::size_t f = 0; f < bins; ++f) {
      // Interior bins appear twice in the Hermitian-symmetric inverse.
      const bool edge = f == 0 || (n % 2 == 0 && f == n / 2);
      grad[f * frames + t] = column[f] * ((edge ? 1.0 : 2.0) * inv_n);
    }
  }
  return grad;
}

std::pair<MagnitudeSpectrogram, PhaseSpectrogram> polar_split(const ComplexSpectrogram& spec) {
  MagnitudeSpectrogram mag{std::vector<double>(spec.bins.size()), spec.num_bins, spec.num_frames,
                           spec.config};
  PhaseSpectrogram phase{std::vector<double>(spec.bins.size()), spec.num_bins, spec.num_frames};
  for (std::size_t i = 0; i < spec.bins.size(); ++i) {
    const auto z = spec.bins[i];
    if (z == std::complex<double>{0.0, 0.0}) {
      mag.values[i] = 0.0;
      phase.values[i] = 0.0;
    } else {
      mag.values[i] = std::abs(z);
      phase.values[i] = std::arg(z);
    }
  }
  return {std::move(mag), std::move(phase)};
}

ComplexSpectrogram polar_combine(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase,
                                 std::size_t original_length, int sample_rate) {
  require(mag.values.size() == phase.values.size() && mag.num_bins == phase.num_bins &&
              mag.num_frames == phase.num_frames,
          ErrorCode::DimensionMismatch, "magnitude and phase shapes differ");
  ComplexSpectrogram spec;
  spec.bins.resize(mag.values.size());
  for (std::size_t i = 0; i < mag.values.size(); ++i)
    spec.bins[i] = std::polar(mag.values[i], phase.values[i]);
  spec.num_bins = mag.num_bins;
  spec.num_frames = mag.num_frames;
  spec.config = mag.config;
  spec.original_length = original_length;
  spec.sample_rate = sample_rate;
  return spec;
}

std::pair<MagnitudeSpectrogram, CropRecord> pad_to_multiple(const MagnitudeSpectrogram& mag,
                                                            std::size_t multiple) {
  require(multiple >= 1, ErrorCode::InvalidArgument, "multiple must be >= 1");
  auto round_up = [multiple](std::size_t v) { return (v + multiple - 1) / multiple * multiple; };
  CropRecord rec{mag.num_bins, mag.num_frames, round_up(mag.num_bins), round_up(mag.num_frames)};
  MagnitudeSpectrogram out{std::vector<double>(rec.padded_bins * rec.padded_frames, 0.0),
                           rec.padded_bins, rec.padded_frames, mag.config};
  for (std::size_t f = 0; f < mag.num_bins; ++f)
    for (std::size_t t = 0; t < mag.num_frames; ++t)
      out.values[f * rec.padded_frames + t] = mag.values[f * mag.num_frames + t];
  return {std::move(out), rec};
}

MagnitudeSpectrogram crop(const MagnitudeSpectrogram& padded, const CropRecord& record) {
  require(padded.num_bins == record.padded_bins && padded.num_frames == record.padded_frames,
          ErrorCode::DimensionMismatch, "crop record does not match the padded spectrogram");
  MagnitudeSpectrogram out{std::vector<double>(record.num_bins * record.num_frames),
                           record.num_bins, record.num_frames, padded.config};
  for (std::size_t f = 0; f < record.num_bins; ++f)
    for (std::size_t t = 0; t < record.num_frames; ++t)
      out.values[f * record.num_frames + t] = padded.values[f * record.padded_frames + t];
  return out;
}

}  // namespace acad::dsp

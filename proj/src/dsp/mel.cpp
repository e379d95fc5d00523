// SPDX-License-Identifier: Apache-2.0
#include "acad/dsp/mel.hpp"

#include <algorithm>
#include <cmath>

namespace acad::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(std::size_t n_fft_bins, std::size_t n_mels, double fmin, double fmax,
                             int sample_rate)
    : n_fft_bins_(n_fft_bins), n_mels_(n_mels), fmin_(fmin), fmax_(fmax) {
  require(n_fft_bins >= 2 && n_mels >= 1, ErrorCode::InvalidArgument, "empty mel filterbank");
  require(sample_rate > 0, ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    fail(ErrorCode::InvalidBandRange, "need 0 <= fmin < fmax <= sample_rate / 2");

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_mels + 1));
  centers_.assign(edges.begin() + 1, edges.end() - 1);

  const double bin_hz = sample_rate / (2.0 * static_cast<double>(n_fft_bins - 1));
  weights_.assign(n_mels * n_fft_bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (std::size_t f = 0; f < n_fft_bins; ++f) {
      const double hz = static_cast<double>(f) * bin_hz;
      const double rising = (hz - lo) / (center - lo);
      const double falling = (hi - hz) / (hi - center);
      weights_[m * n_fft_bins + f] = std::clamp(std::min(rising, falling), 0.0, 1.0);
    }
  }
}

LogMelSpectrogram log_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb) {
  if (mag.num_bins != fb.num_fft_bins() || mag.values.size() != mag.num_bins * mag.num_frames)
    fail(ErrorCode::DimensionMismatch, "magnitude has " + std::to_string(mag.num_bins) +
                                           " bins, filterbank expects " +
                                           std::to_string(fb.num_fft_bins()));
  const std::size_t frames = mag.num_frames;
  const std::size_t bins = mag.num_bins;
  LogMelSpectrogram out{std::vector<double>(fb.num_mels() * frames, 0.0), fb.num_mels(), frames,
                        fb.fmin(), fb.fmax()};
  std::vector<double> power(mag.values.size());
  for (std::size_t i = 0; i < power.size(); ++i) power[i] = mag.values[i] * mag.values[i];
  for (std::size_t m = 0; m < fb.num_mels(); ++m) {
    double* row = &out.values[m * frames];
    for (std::size_t f = 0; f < bins; ++f) {
      const double w = fb.weight(m, f);
      if (w == 0.0) continue;
      const double* p = &power[f * frames];
      for (std::size_t t = 0; t < frames; ++t) row[t] += w * p[t];
    }
    for (std::size_t t = 0; t < frames; ++t) row[t] = std::log(row[t] + kLogMelFloor);
  }
  return out;
}

}  // namespace acad::dsp

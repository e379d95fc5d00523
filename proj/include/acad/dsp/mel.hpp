// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "acad/dsp/stft.hpp"

namespace acad::dsp {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters on the HTK mel scale, each peaking at 1.
/// Immutable after construction; weights are stored M x F row-major.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t n_fft_bins, std::size_t n_mels, double fmin, double fmax,
                int sample_rate);

  std::size_t num_mels() const noexcept { return n_mels_; }
  std::size_t num_fft_bins() const noexcept { return n_fft_bins_; }
  double weight(std::size_t m, std::size_t f) const { return weights_[m * n_fft_bins_ + f]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Center frequency of each filter in Hz.
  const std::vector<double>& centers_hz() const noexcept { return centers_; }
  double fmin() const noexcept { return fmin_; }
  double fmax() const noexcept { return fmax_; }

 private:
  std::size_t n_fft_bins_;
  std::size_t n_mels_;
  double fmin_;
  double fmax_;
  std::vector<double> weights_;
  std::vector<double> centers_;
};

struct LogMelSpectrogram {
  std::vector<double> values;  // M x T row-major
  std::size_t num_mels = 0;
  std::size_t num_frames = 0;
  double fmin = 0.0;
  double fmax = 0.0;
};

inline constexpr double kLogMelFloor = 1e-10;

/// log(fb * |X|^2 + 1e-10), computed on the power spectrogram.
LogMelSpectrogram log_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb);

}  // namespace acad::dsp

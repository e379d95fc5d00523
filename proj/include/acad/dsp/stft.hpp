// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "acad/audio/audio_clip.hpp"

namespace acad::dsp {

enum class WindowType { Hann };

struct StftConfig {
  int window_size = 1024;
  int hop = 512;
  WindowType window = WindowType::Hann;
  bool center_pad = true;

  int bins() const noexcept { return window_size / 2 + 1; }
  /// Number of frames for a signal of `length` samples.
  std::size_t frames(std::size_t length) const;
  void validate() const;
};

/// Periodic Hann window of the configured size.
std::vector<double> analysis_window(const StftConfig& cfg);

/// F x T complex bins stored row-major by frequency: bins[f * frames + t].
struct ComplexSpectrogram {
  std::vector<std::complex<double>> bins;
  std::size_t num_bins = 0;
  std::size_t num_frames = 0;
  StftConfig config;
  std::size_t original_length = 0;
  int sample_rate = 0;

  std::complex<double>& at(std::size_t f, std::size_t t) { return bins[f * num_frames + t]; }
  const std::complex<double>& at(std::size_t f, std::size_t t) const {
    return bins[f * num_frames + t];
  }
};

struct MagnitudeSpectrogram {
  std::vector<double> values;  // F x T, row-major by frequency
  std::size_t num_bins = 0;
  std::size_t num_frames = 0;
  StftConfig config;

  double at(std::size_t f, std::size_t t) const { return values[f * num_frames + t]; }
};

struct PhaseSpectrogram {
  std::vector<double> values;  // radians, F x T
  std::size_t num_bins = 0;
  std::size_t num_frames = 0;
};

ComplexSpectrogram stft(const audio::AudioClip& clip, const StftConfig& cfg);

/// Least-squares overlap-add inverse, cropped to spec.original_length.
audio::AudioClip istft(const ComplexSpectrogram& spec);

/// Adjoint of istft viewed as a real-linear map from (Re, Im) of every bin to
/// the output samples. `grad_samples` has original_length entries; the result
/// holds dL/dRe + i dL/dIm per bin in the layout of `like`.
std::vector<std::complex<double>> istft_adjoint(const std::vector<double>& grad_samples,
                                                const ComplexSpectrogram& like);

/// Splits into magnitude and phase. A zero bin maps to magnitude 0, phase 0.
std::pair<MagnitudeSpectrogram, PhaseSpectrogram> polar_split(const ComplexSpectrogram& spec);

ComplexSpectrogram polar_combine(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase,
                                 std::size_t original_length, int sample_rate);

struct CropRecord {
  std::size_t num_bins = 0;
  std::size_t num_frames = 0;
  std::size_t padded_bins = 0;
  std::size_t padded_frames = 0;
};

/// Zero-pads both axes up to the next multiple of `multiple`.
std::pair<MagnitudeSpectrogram, CropRecord> pad_to_multiple(const MagnitudeSpectrogram& mag,
                                                            std::size_t multiple);
MagnitudeSpectrogram crop(const MagnitudeSpectrogram& padded, const CropRecord& record);

}  // namespace acad::dsp

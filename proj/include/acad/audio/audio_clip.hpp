// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "acad/core/error.hpp"

namespace acad::audio {

/// Mono sample buffer with its sample rate. Amplitudes are nominally in
/// [-1, 1]; values outside that range are allowed (e.g. after mixing).
class AudioClip {
 public:
  AudioClip(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(!samples_.empty(), ErrorCode::InvalidArgument, "audio clip must hold at least one sample");
    require(sample_rate_ > 0, ErrorCode::InvalidArgument, "sample rate must be positive");
  }

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::vector<double>& samples() noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  int sample_rate_;
};

/// Integrated loudness in LUFS. Digital silence is represented by -infinity.
struct LoudnessLufs {
  double value;
  bool is_silent() const noexcept;
};

}  // namespace acad::audio

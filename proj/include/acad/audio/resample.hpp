// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "acad/audio/audio_clip.hpp"

namespace acad::audio {

/// Polyphase Kaiser-windowed sinc resampler (64 taps per phase, beta 8.6).
/// Output length is round(len * target / source). Identity when the rates
/// already match.
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace acad::audio

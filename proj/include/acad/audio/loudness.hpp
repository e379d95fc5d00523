// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "acad/audio/audio_clip.hpp"

namespace acad::audio {

/// ITU-R BS.1770-4 integrated loudness: K-weighting, 400 ms blocks with 75%
/// overlap, -70 LUFS absolute gate, then -10 LU relative gate. Returns
/// -infinity for digital silence or when every block is gated out.
///
/// Clips shorter than one 400 ms block are measured as a single block that
/// spans the whole clip.
LoudnessLufs integrated_loudness(const AudioClip& clip);

/// Scales the clip by one scalar gain so its integrated loudness equals
/// `target`. Throws SilentSignal for silent input.
AudioClip gain_to_loudness(const AudioClip& clip, LoudnessLufs target);

double db_to_gain(double db);
double gain_to_db(double gain);

}  // namespace acad::audio

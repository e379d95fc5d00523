// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "acad/audio/audio_clip.hpp"

namespace acad::audio {

// RIFF/WAVE reader for PCM16 and IEEE float32. Multichannel input is
// downmixed by averaging channels. PCM16 is scaled by 1/32768.
AudioClip read_wav(const std::filesystem::path& path);

// Always writes mono IEEE float32. A non-empty `comment` is stored in a
// LIST/INFO ICMT chunk, which readers skip.
void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               std::string_view comment = {});

// ICMT comment of a file written by write_wav, or an empty string.
std::string read_wav_comment(const std::filesystem::path& path);

// PCM16 writer, mostly for fixtures and interop.
void write_wav_pcm16(const std::vector<std::vector<double>>& channels, int sample_rate,
                     const std::filesystem::path& path);

}  // namespace acad::audio

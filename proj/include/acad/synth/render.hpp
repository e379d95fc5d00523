// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "acad/audio/audio_clip.hpp"
#include "acad/synth/mix_spec.hpp"

namespace acad::synth {

/// Resolves catalog references to audio at one fixed rate. Loaded and
/// resampled clips are cached; lookups are thread-safe.
class SourceLibrary {
 public:
  SourceLibrary(std::filesystem::path root, int sample_rate);
  virtual ~SourceLibrary() = default;

  std::shared_ptr<const audio::AudioClip> get(const std::string& ref) const;
  int sample_rate() const noexcept { return sample_rate_; }

 protected:
  virtual audio::AudioClip load(const std::string& ref) const;

 private:
  std::filesystem::path root_;
  int sample_rate_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const audio::AudioClip>> cache_;
};

/// In-memory sources, keyed by reference; used by tests and generators.
class MemorySourceLibrary : public SourceLibrary {
 public:
  explicit MemorySourceLibrary(int sample_rate) : SourceLibrary({}, sample_rate) {}
  void add(const std::string& ref, audio::AudioClip clip) { clips_.insert_or_assign(ref, std::move(clip)); }

 protected:
  audio::AudioClip load(const std::string& ref) const override;

 private:
  std::map<std::string, audio::AudioClip> clips_;
};

struct RenderedPair {
  audio::AudioClip noisy;
  audio::AudioClip clean;
  /// Each scaled event placed on a silent clip-length canvas, in spec order.
  std::vector<audio::AudioClip> events;
  bool clipped = false;
};

/// clean = background segment gained to background_lufs; each event is
/// trimmed, faded, gained so its loudness is background_lufs + snr_db and
/// added at start_s. noisy = clean + events, summed in spec order, with no
/// renormalisation afterwards.
RenderedPair render_pair(const MixSpec& spec, const SourceLibrary& sources, const SynthConfig& cfg);

}  // namespace acad::synth

// SPDX-License-Identifier: Apache-2.0
#include "acad/audio/loudness.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace acad::audio {

namespace {

struct Biquad {
  std::array<double, 3> b;
  std::array<double, 3> a;  // a[0] == 1

  void apply(std::vector<double>& x) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      const double y = b[0] * v + b[1] * x1 + b[2] * x2 - a[1] * y1 - a[2] * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

// K-weighting stages designed for an arbitrary rate from the analog
// prototype parameters; at 48 kHz these reproduce the tabulated coefficients.
Biquad shelving_stage(double rate) {
  const double f0 = 1681.974450955533;
  const double gain_db = 3.999843853973347;
  const double q = 0.7071752369554196;
  const double k = std::tan(std::numbers::pi * f0 / rate);
  const double vh = std::pow(10.0, gain_db / 20.0);
  const double vb = std::pow(vh, 0.4996667741545416);
  const double a0 = 1.0 + k / q + k * k;
  return Biquad{{(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0,
                 (vh - vb * k / q + k * k) / a0},
                {1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0}};
}

Biquad highpass_stage(double rate) {
  const double f0 = 38.13547087602444;
  const double q = 0.5003270373238773;
  const double k = std::tan(std::numbers::pi * f0 / rate);
  const double a0 = 1.0 + k / q + k * k;
  return Biquad{{1.0, -2.0, 1.0}, {1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0}};
}

constexpr double kOffset = -0.691;
constexpr double kAbsoluteGate = -70.0;
constexpr double kRelativeGate = -10.0;

double block_loudness(double mean_square) { return kOffset + 10.0 * std::log10(mean_square); }

}  // namespace

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }
double gain_to_db(double gain) { return 20.0 * std::log10(gain); }

LoudnessLufs integrated_loudness(const AudioClip& clip) {
  constexpr double kSilent = -std::numeric_limits<double>::infinity();
  std::vector<double> y = clip.samples();
  const double rate = clip.sample_rate();
  shelving_stage(rate).apply(y);
  highpass_stage(rate).apply(y);

  const auto block = static_cast<std::size_t>(std::lround(0.4 * rate));
  const auto step = static_cast<std::size_t>(std::lround(0.1 * rate));
  const std::size_t n = y.size();

  std::vector<double> block_power;
  if (n < block) {
    double acc = 0.0;
    for (double v : y) acc += v * v;
    block_power.push_back(acc / static_cast<double>(n));
  } else {
    // Running sum of squares gives every block in O(n).
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i] * y[i];
    for (std::size_t start = 0; start + block <= n; start += step)
      block_power.push_back((prefix[start + block] - prefix[start]) / static_cast<double>(block));
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (double z : block_power) {
    if (z > 0.0 && block_loudness(z) > kAbsoluteGate) {
      sum += z;
      ++count;
    }
  }
  if (count == 0) return {kSilent};
  const double relative_threshold = block_loudness(sum / count) + kRelativeGate;

  double gated_sum = 0.0;
  std::size_t gated_count = 0;
  for (double z : block_power) {
    if (z > 0.0) {
      const double l = block_loudness(z);
      if (l > kAbsoluteGate && l > relative_threshold) {
        gated_sum += z;
        ++gated_count;
      }
    }
  }
  if (gated_count == 0) return {kSilent};
  return {block_loudness(gated_sum / gated_count)};
}

AudioClip gain_to_loudness(const AudioClip& clip, LoudnessLufs target) {
  AudioClip out = clip;
  // The absolute gate can admit or drop blocks once the level moves, so one
  // correction pass follows the first scalar gain.
  for (int pass = 0; pass < 3; ++pass) {
    const LoudnessLufs current = integrated_loudness(out);
    if (current.is_silent()) fail(ErrorCode::SilentSignal, "cannot gain a silent clip to a loudness target");
    const double delta = target.value - current.value;
    if (pass > 0 && std::abs(delta) < 1e-6) break;
    const double g = db_to_gain(delta);
    for (double& v : out.samples()) v *= g;
  }
  return out;
}

}  // namespace acad::audio

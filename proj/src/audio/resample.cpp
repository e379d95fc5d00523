// SPDX-License-Identifier: Apache-2.0
#include "acad/audio/resample.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <numbers>

namespace acad::audio {

namespace {

constexpr int kTaps = 64;
constexpr int kHalf = kTaps / 2;
constexpr double kBeta = 8.6;
// Passband edge relative to the lower of the two Nyquist frequencies.
constexpr double kRolloff = 0.94;
constexpr std::int64_t kMaxTablePhases = 8192;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double x, double i0_beta) {
  // x in [-1, 1]
  if (std::abs(x) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - x * x)) / i0_beta;
}

// Taps for one fractional phase. Tap k applies to input sample base + k - kHalf + 1.
void phase_taps(double frac, double cutoff, double i0_beta, double* taps) {
  double sum = 0.0;
  for (int k = 0; k < kTaps; ++k) {
    const double tau = static_cast<double>(k - kHalf + 1) - frac;
    const double v = cutoff * sinc(cutoff * tau) * kaiser(tau / (kHalf + 0.5), i0_beta);
    taps[k] = v;
    sum += v;
  }
  for (int k = 0; k < kTaps; ++k) taps[k] /= sum;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
  require(target_rate > 0, ErrorCode::InvalidArgument, "target rate must be positive");
  const int source_rate = clip.sample_rate();
  if (source_rate == target_rate) return clip;

  const std::int64_t g = std::gcd(source_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = source_rate / g;
  const auto in_len = static_cast<std::int64_t>(clip.size());
  const std::int64_t out_len =
      std::max<std::int64_t>(1, (2 * in_len * target_rate + source_rate) / (2 * source_rate));

  // Normalized cutoff in cycles per input sample, times two (sinc argument scale).
  const double cutoff = kRolloff * std::min(1.0, static_cast<double>(up) / down);
  const double i0_beta = std::cyl_bessel_i(0.0, kBeta);

  const bool use_table = up <= kMaxTablePhases;
  std::vector<double> table;
  if (use_table) {
    table.resize(static_cast<std::size_t>(up * kTaps));
    for (std::int64_t p = 0; p < up; ++p)
      phase_taps(static_cast<double>(p) / up, cutoff, i0_beta, &table[p * kTaps]);
  }

  const auto& x = clip.samples();
  std::vector<double> y(static_cast<std::size_t>(out_len));
  std::vector<double> scratch(kTaps);
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t base = pos / up;
    const std::int64_t phase = pos % up;
    const double* taps;
    if (use_table) {
      taps = &table[phase * kTaps];
    } else {
      phase_taps(static_cast<double>(phase) / up, cutoff, i0_beta, scratch.data());
      taps = scratch.data();
    }
    double acc = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const std::int64_t idx = base + k - kHalf + 1;
      if (idx >= 0 && idx < in_len) acc += taps[k] * x[static_cast<std::size_t>(idx)];
    }
    y[static_cast<std::size_t>(n)] = acc;
  }
  return AudioClip(std::move(y), target_rate);
}

}  // namespace acad::audio

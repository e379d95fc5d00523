// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <memory>
#include <span>

namespace acad::dsp {

/// Real-input FFT of a fixed size backed by FFTW. Plans are created once per
/// size under a global lock; execution is thread-safe.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return size_; }
  int bins() const noexcept { return size_ / 2 + 1; }

  /// out[k] = sum_n in[n] exp(-2 pi i k n / N), k in [0, N/2].
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Inverse of forward including the 1/N factor.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  int size_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

}  // namespace acad::dsp

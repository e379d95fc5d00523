// SPDX-License-Identifier: Apache-2.0
#include "acad/dsp/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "acad/core/error.hpp"

namespace acad::dsp {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

RealFft::RealFft(int size) : size_(size), plans_(std::make_unique<Plans>()) {
  require(size >= 2, ErrorCode::InvalidArgument, "FFT size must be at least 2");
  std::vector<double> real(static_cast<std::size_t>(size));
  std::vector<std::complex<double>> cplx(static_cast<std::size_t>(bins()));
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  std::lock_guard lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_1d(size, real.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->c2r = fftw_plan_dft_c2r_1d(size, c, real.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  if (!plans_->r2c || !plans_->c2r) fail(ErrorCode::InvalidArgument, "FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  if (plans_->r2c) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r) fftw_destroy_plan(plans_->c2r);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  require(static_cast<int>(in.size()) == size_ && static_cast<int>(out.size()) == bins(),
          ErrorCode::DimensionMismatch, "FFT buffer size");
  // r2c does not modify its input, but the API takes a non-const pointer.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  require(static_cast<int>(in.size()) == bins() && static_cast<int>(out.size()) == size_,
          ErrorCode::DimensionMismatch, "IFFT buffer size");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / size_;
  for (double& v : out) v *= scale;
}

}  // namespace acad::dsp

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace acad::nn::kernels {

/// NCHW convolution geometry with square kernels and symmetric zero padding.
struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t in_h = 1;
  std::size_t in_w = 1;
  std::size_t out_channels = 1;
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 1;

  /// Output size ceil(in / stride) with pad = kernel / 2.
  static ConvGeometry same(std::size_t batch, std::size_t in_channels, std::size_t in_h, std::size_t in_w,
                           std::size_t out_channels, std::size_t kernel, std::size_t stride);

  std::size_t in_size() const { return batch * in_channels * in_h * in_w; }
  std::size_t out_size() const { return batch * out_channels * out_h * out_w; }
  std::size_t weight_size() const { return out_channels * in_channels * kernel * kernel; }
  /// True when every output tap window lies within the padded input.
  bool consistent() const;
};

// OpenMP-parallel kernels (im2col + GEMM, parallel over the batch).
// Weights are [out_channels, in_channels, kernel, kernel].

/// y = conv(x, w) + b. `b` may be null.
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b, double* y);
/// dx += conv^T(dy, w)
void conv2d_backward_data(const ConvGeometry& g, const double* dy, const double* w, double* dx);
/// dw += dy (*) x ; db += sum(dy). `db` may be null.
void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw, double* db);

/// Serial direct-loop kernels with identical semantics, kept as the test
/// oracle for the parallel versions.
namespace reference {
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b, double* y);
void conv2d_backward_data(const ConvGeometry& g, const double* dy, const double* w, double* dx);
void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw, double* db);
}  // namespace reference

}  // namespace acad::nn::kernels

// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/kernels.hpp"

namespace acad::nn::kernels {

ConvGeometry ConvGeometry::same(std::size_t batch, std::size_t in_channels, std::size_t in_h, std::size_t in_w,
                                std::size_t out_channels, std::size_t kernel, std::size_t stride) {
  ConvGeometry g;
  g.batch = batch;
  g.in_channels = in_channels;
  g.in_h = in_h;
  g.in_w = in_w;
  g.out_channels = out_channels;
  g.kernel = kernel;
  g.stride = stride;
  g.pad = kernel / 2;
  g.out_h = (in_h + stride - 1) / stride;
  g.out_w = (in_w + stride - 1) / stride;
  return g;
}

bool ConvGeometry::consistent() const {
  if (stride == 0 || kernel == 0) return false;
  if (in_h + 2 * pad < kernel || in_w + 2 * pad < kernel) return false;
  return out_h == (in_h + 2 * pad - kernel) / stride + 1 && out_w == (in_w + 2 * pad - kernel) / stride + 1;
}

namespace reference {

void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b, double* y) {
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h), iw = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t co = 0; co < g.out_channels; ++co)
      for (std::size_t oy = 0; oy < g.out_h; ++oy)
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          double acc = b ? b[co] : 0.0;
          for (std::size_t ci = 0; ci < g.in_channels; ++ci)
            for (std::size_t ky = 0; ky < g.kernel; ++ky)
              for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                const auto yy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
                const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
                if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
                acc += w[((co * g.in_channels + ci) * g.kernel + ky) * g.kernel + kx] *
                       x[((n * g.in_channels + ci) * g.in_h + static_cast<std::size_t>(yy)) * g.in_w +
                         static_cast<std::size_t>(xx)];
              }
          y[((n * g.out_channels + co) * g.out_h + oy) * g.out_w + ox] = acc;
        }
}

void conv2d_backward_data(const ConvGeometry& g, const double* dy, const double* w, double* dx) {
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h), iw = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t co = 0; co < g.out_channels; ++co)
      for (std::size_t oy = 0; oy < g.out_h; ++oy)
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          const double d = dy[((n * g.out_channels + co) * g.out_h + oy) * g.out_w + ox];
          for (std::size_t ci = 0; ci < g.in_channels; ++ci)
            for (std::size_t ky = 0; ky < g.kernel; ++ky)
              for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                const auto yy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
                const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
                if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
                dx[((n * g.in_channels + ci) * g.in_h + static_cast<std::size_t>(yy)) * g.in_w +
                   static_cast<std::size_t>(xx)] += d * w[((co * g.in_channels + ci) * g.kernel + ky) * g.kernel + kx];
              }
        }
}

void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw, double* db) {
  const auto ih = static_cast<std::ptrdiff_t>(g.in_h), iw = static_cast<std::ptrdiff_t>(g.in_w);
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t co = 0; co < g.out_channels; ++co)
      for (std::size_t oy = 0; oy < g.out_h; ++oy)
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          const double d = dy[((n * g.out_channels + co) * g.out_h + oy) * g.out_w + ox];
          if (db) db[co] += d;
          for (std::size_t ci = 0; ci < g.in_channels; ++ci)
            for (std::size_t ky = 0; ky < g.kernel; ++ky)
              for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                const auto yy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
                const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
                if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
                dw[((co * g.in_channels + ci) * g.kernel + ky) * g.kernel + kx] +=
                    d * x[((n * g.in_channels + ci) * g.in_h + static_cast<std::size_t>(yy)) * g.in_w +
                          static_cast<std::size_t>(xx)];
              }
        }
}

}  // namespace reference
}  // namespace acad::nn::kernels

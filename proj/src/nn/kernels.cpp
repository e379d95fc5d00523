// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <vector>

namespace acad::nn::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

// cols is (in_channels * k * k) x (out_h * out_w) for one sample.
void im2col(const ConvGeometry& g, const double* x, double* cols) {
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
    const double* xc = x + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        double* row = cols + ((ci * g.kernel + ky) * g.kernel + kx) * plane;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto yy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          double* out = row + oy * g.out_w;
          if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(g.in_h)) {
            std::fill(out, out + g.out_w, 0.0);
            continue;
          }
          const double* xr = xc + static_cast<std::size_t>(yy) * g.in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            out[ox] = (xx < 0 || xx >= static_cast<std::ptrdiff_t>(g.in_w)) ? 0.0 : xr[xx];
          }
        }
      }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* dx) {
  const std::size_t plane = g.out_h * g.out_w;
  for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
    double* dxc = dx + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const double* row = cols + ((ci * g.kernel + ky) * g.kernel + kx) * plane;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto yy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          double* dr = dxc + static_cast<std::size_t>(yy) * g.in_w;
          const double* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (xx >= 0 && xx < static_cast<std::ptrdiff_t>(g.in_w)) dr[xx] += src[ox];
          }
        }
      }
  }
}

std::size_t col_rows(const ConvGeometry& g) { return g.in_channels * g.kernel * g.kernel; }

}  // namespace

void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b, double* y) {
  const auto rows = static_cast<Eigen::Index>(col_rows(g));
  const auto plane = static_cast<Eigen::Index>(g.out_h * g.out_w);
  const auto cout = static_cast<Eigen::Index>(g.out_channels);
  const ConstMapMatrix weights(w, cout, rows);
  const auto batch = static_cast<std::ptrdiff_t>(g.batch);
#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(rows * plane));
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      im2col(g, x + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w, cols.data());
      MapMatrix out(y + static_cast<std::size_t>(n) * g.out_channels * g.out_h * g.out_w, cout, plane);
      out.noalias() = weights * ConstMapMatrix(cols.data(), rows, plane);
      if (b)
        for (Eigen::Index c = 0; c < cout; ++c) out.row(c).array() += b[c];
    }
  }
}

void conv2d_backward_data(const ConvGeometry& g, const double* dy, const double* w, double* dx) {
  const auto rows = static_cast<Eigen::Index>(col_rows(g));
  const auto plane = static_cast<Eigen::Index>(g.out_h * g.out_w);
  const auto cout = static_cast<Eigen::Index>(g.out_channels);
  const ConstMapMatrix weights(w, cout, rows);
  const auto batch = static_cast<std::ptrdiff_t>(g.batch);
#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(rows * plane));
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      MapMatrix dcols(cols.data(), rows, plane);
      dcols.noalias() =
          weights.transpose() *
          ConstMapMatrix(dy + static_cast<std::size_t>(n) * g.out_channels * g.out_h * g.out_w, cout, plane);
      col2im_add(g, cols.data(), dx + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w);
    }
  }
}

void conv2d_backward_weight(const ConvGeometry& g, const double* x, const double* dy, double* dw, double* db) {
  const auto rows = static_cast<Eigen::Index>(col_rows(g));
  const auto plane = static_cast<Eigen::Index>(g.out_h * g.out_w);
  const auto cout = static_cast<Eigen::Index>(g.out_channels);
  const auto batch = static_cast<std::ptrdiff_t>(g.batch);
  const std::size_t wsize = g.weight_size();
  // Per-sample partial sums, reduced in sample order afterwards so the result
  // does not depend on the thread schedule.
  std::vector<double> partial(static_cast<std::size_t>(batch) * wsize);
#pragma omp parallel
  {
    std::vector<double> cols(static_cast<std::size_t>(rows * plane));
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < batch; ++n) {
      im2col(g, x + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w, cols.data());
      MapMatrix pw(partial.data() + static_cast<std::size_t>(n) * wsize, cout, rows);
      pw.noalias() =
          ConstMapMatrix(dy + static_cast<std::size_t>(n) * g.out_channels * g.out_h * g.out_w, cout, plane) *
          ConstMapMatrix(cols.data(), rows, plane).transpose();
    }
  }
  for (std::ptrdiff_t n = 0; n < batch; ++n) {
    const double* p = partial.data() + static_cast<std::size_t>(n) * wsize;
    for (std::size_t i = 0; i < wsize; ++i) dw[i] += p[i];
  }
  if (db) {
    for (std::ptrdiff_t n = 0; n < batch; ++n)
      for (std::size_t c = 0; c < g.out_channels; ++c) {
        const double* row = dy + (static_cast<std::size_t>(n) * g.out_channels + c) * g.out_h * g.out_w;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.out_h * g.out_w; ++i) acc += row[i];
        db[c] += acc;
      }
  }
}

}  // namespace acad::nn::kernels

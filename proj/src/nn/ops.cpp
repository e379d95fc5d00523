// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "acad/core/error.hpp"
#include "acad/nn/kernels.hpp"

namespace acad::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }
bool wants(Node& self, std::size_t i) { return i < self.parents.size() && self.parents[i]->requires_grad; }

void check_shape(bool ok, const std::string& what) { require(ok, ErrorCode::ShapeMismatch, what); }

void check_rank(const Tensor& t, std::size_t rank, const char* op) {
  check_shape(t.defined() && t.rank() == rank,
              std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                  (t.defined() ? shape_str(t.shape()) : std::string("undefined")));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_shape(a.shape() == b.shape(), "add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] + b.data()[i];
  return make_result(a.shape(), std::move(v), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (wants(self, k)) {
        auto& g = parent(self, k).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * s;
  return make_result(a.shape(), std::move(v), {a}, [s](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Tensor weighted_sum(const std::vector<Tensor>& scalars, const std::vector<double>& weights) {
  check_shape(scalars.size() == weights.size() && !scalars.empty(), "weighted_sum: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) total += weights[i] * scalars[i].item();
  return make_result({1}, {total}, scalars, [weights](Node& self) {
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (wants(self, i)) parent(self, i).ensure_grad()[0] += weights[i] * self.grad[0];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_shape(a.shape() == b.shape(), "mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.data()[i] * b.data()[i];
  return make_result(a.shape(), std::move(v), {a, b}, [](Node& self) {
    const auto& av = parent(self, 0).value;
    const auto& bv = parent(self, 1).value;
    if (wants(self, 0)) {
      auto& g = parent(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      auto& g = parent(self, 1).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> v(x.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  return make_result(x.shape(), std::move(v), {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (self.value[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> v(x.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-x.data()[i]));
  return make_result(x.shape(), std::move(v), {x}, [](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i] * (1.0 - self.value[i]);
  });
}

Tensor mean(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const double inv = 1.0 / static_cast<double>(x.numel());
  return make_result({1}, {acc * inv}, {x}, [inv](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (double& v : g) v += self.grad[0] * inv;
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  check_rank(x, 2, "linear");
  check_rank(w, 2, "linear");
  const auto n = static_cast<Eigen::Index>(x.dim(0));
  const auto in = static_cast<Eigen::Index>(x.dim(1));
  const auto out = static_cast<Eigen::Index>(w.dim(0));
  check_shape(w.dim(1) == x.dim(1), "linear: weight " + shape_str(w.shape()) + " vs input " + shape_str(x.shape()));
  const bool has_bias = b.defined();
  if (has_bias) check_shape(b.numel() == w.dim(0), "linear: bias size");

  std::vector<double> v(static_cast<std::size_t>(n * out));
  MapMatrix y(v.data(), n, out);
  y.noalias() = ConstMapMatrix(x.data().data(), n, in) * ConstMapMatrix(w.data().data(), out, in).transpose();
  if (has_bias)
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < out; ++c) y(r, c) += b.data()[static_cast<std::size_t>(c)];

  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result({x.dim(0), w.dim(0)}, std::move(v), parents, [n, in, out](Node& self) {
    const ConstMapMatrix dy(self.grad.data(), n, out);
    if (wants(self, 0)) {
      MapMatrix dx(parent(self, 0).ensure_grad().data(), n, in);
      dx.noalias() += dy * ConstMapMatrix(parent(self, 1).value.data(), out, in);
    }
    if (wants(self, 1)) {
      MapMatrix dw(parent(self, 1).ensure_grad().data(), out, in);
      dw.noalias() += dy.transpose() * ConstMapMatrix(parent(self, 0).value.data(), n, in);
    }
    if (wants(self, 2)) {
      auto& db = parent(self, 2).ensure_grad();
      for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < out; ++c) db[static_cast<std::size_t>(c)] += dy(r, c);
    }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride) {
  check_rank(x, 4, "conv2d");
  check_rank(w, 4, "conv2d weight");
  check_shape(w.dim(1) == x.dim(1), "conv2d: weight " + shape_str(w.shape()) + " vs input " + shape_str(x.shape()));
  check_shape(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1, "conv2d: kernel must be square and odd");
  check_shape(stride >= 1, "conv2d: stride must be >= 1");
  const auto g = kernels::ConvGeometry::same(x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride);
  check_shape(g.consistent(), "conv2d: input " + shape_str(x.shape()) + " too small for the kernel");
  const bool has_bias = b.defined();
  if (has_bias) check_shape(b.numel() == w.dim(0), "conv2d: bias size");

  std::vector<double> y(g.out_size());
  kernels::conv2d_forward(g, x.data().data(), w.data().data(), has_bias ? b.data().data() : nullptr, y.data());
  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result({g.batch, g.out_channels, g.out_h, g.out_w}, std::move(y), parents, [g](Node& self) {
    if (wants(self, 0))
      kernels::conv2d_backward_data(g, self.grad.data(), parent(self, 1).value.data(),
                                    parent(self, 0).ensure_grad().data());
    if (wants(self, 1) || wants(self, 2)) {
      std::vector<double> dw_scratch;
      double* dw;
      if (wants(self, 1)) {
        dw = parent(self, 1).ensure_grad().data();
      } else {
        dw_scratch.assign(g.weight_size(), 0.0);
        dw = dw_scratch.data();
      }
      double* db = wants(self, 2) ? parent(self, 2).ensure_grad().data() : nullptr;
      kernels::conv2d_backward_weight(g, parent(self, 0).value.data(), self.grad.data(), dw, db);
    }
  });
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                        std::size_t out_h, std::size_t out_w) {
  check_rank(x, 4, "conv_transpose2d");
  check_rank(w, 4, "conv_transpose2d weight");
  check_shape(w.dim(0) == x.dim(1), "conv_transpose2d: weight " + shape_str(w.shape()) + " vs input " +
                                        shape_str(x.shape()));
  check_shape(w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1, "conv_transpose2d: kernel must be square and odd");
  // The forward conv this op is the adjoint of: Cout_tr channels in, Cin_tr out.
  const auto g = kernels::ConvGeometry::same(x.dim(0), w.dim(1), out_h, out_w, w.dim(0), w.dim(2), stride);
  check_shape(g.out_h == x.dim(2) && g.out_w == x.dim(3) && g.consistent(),
              "conv_transpose2d: output " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                  " does not mirror input " + shape_str(x.shape()));
  const bool has_bias = b.defined();
  if (has_bias) check_shape(b.numel() == w.dim(1), "conv_transpose2d: bias size");

  std::vector<double> y(g.in_size(), 0.0);
  kernels::conv2d_backward_data(g, x.data().data(), w.data().data(), y.data());
  if (has_bias) {
    const std::size_t plane = out_h * out_w;
    for (std::size_t n = 0; n < g.batch; ++n)
      for (std::size_t c = 0; c < g.in_channels; ++c) {
        double* p = y.data() + (n * g.in_channels + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) p[i] += b.data()[c];
      }
  }
  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result({g.batch, g.in_channels, out_h, out_w}, std::move(y), parents, [g](Node& self) {
    if (wants(self, 0)) {
      std::vector<double> dx(g.out_size());
      kernels::conv2d_forward(g, self.grad.data(), parent(self, 1).value.data(), nullptr, dx.data());
      auto& acc = parent(self, 0).ensure_grad();
      for (std::size_t i = 0; i < dx.size(); ++i) acc[i] += dx[i];
    }
    if (wants(self, 1))
      kernels::conv2d_backward_weight(g, self.grad.data(), parent(self, 0).value.data(),
                                      parent(self, 1).ensure_grad().data(), nullptr);
    if (wants(self, 2)) {
      auto& db = parent(self, 2).ensure_grad();
      const std::size_t plane = g.in_h * g.in_w;
      for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          const double* p = self.grad.data() + (n * g.in_channels + c) * plane;
          double acc = 0.0;
          for (std::size_t i = 0; i < plane; ++i) acc += p[i];
          db[c] += acc;
        }
    }
  });
}

Tensor batch_norm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, bool training, double momentum, double eps) {
  check_rank(x, 4, "batch_norm2d");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  check_shape(gamma.numel() == c && beta.numel() == c && running_mean.numel() == c && running_var.numel() == c,
              "batch_norm2d: parameter sizes");
  const std::size_t count = n * plane;
  std::vector<double> mean_c(c), inv_std(c);
  const auto& xv = x.data();
  if (training) {
    check_shape(count > 1, "batch_norm2d: training needs more than one value per channel");
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.data() + (i * c + ch) * plane;
        for (std::size_t k = 0; k < plane; ++k) s += p[k];
      }
      const double mu = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = xv.data() + (i * c + ch) * plane;
        for (std::size_t k = 0; k < plane; ++k) ss += (p[k] - mu) * (p[k] - mu);
      }
      const double var = ss / static_cast<double>(count);
      mean_c[ch] = mu;
      inv_std[ch] = 1.0 / std::sqrt(var + eps);
      auto& rm = running_mean.data();
      auto& rv = running_var.data();
      rm[ch] = (1.0 - momentum) * rm[ch] + momentum * mu;
      rv[ch] = (1.0 - momentum) * rv[ch] + momentum * ss / static_cast<double>(count - 1);
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean_c[ch] = running_mean.data()[ch];
      inv_std[ch] = 1.0 / std::sqrt(running_var.data()[ch] + eps);
    }
  }

  std::vector<double> xhat(xv.size()), y(xv.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (i * c + ch) * plane;
      const double gm = gamma.data()[ch], bt = beta.data()[ch];
      for (std::size_t k = 0; k < plane; ++k) {
        xhat[off + k] = (xv[off + k] - mean_c[ch]) * inv_std[ch];
        y[off + k] = gm * xhat[off + k] + bt;
      }
    }

  return make_result(x.shape(), std::move(y), {x, gamma, beta},
                     [xhat = std::move(xhat), inv_std, training, n, c, plane, count](Node& self) {
                       const auto& dy = self.grad;
                       const auto& gm = parent(self, 1).value;
                       std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const std::size_t off = (i * c + ch) * plane;
                           for (std::size_t k = 0; k < plane; ++k) {
                             sum_dy[ch] += dy[off + k];
                             sum_dy_xhat[ch] += dy[off + k] * xhat[off + k];
                           }
                         }
                       if (wants(self, 1)) {
                         auto& g = parent(self, 1).ensure_grad();
                         for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_dy_xhat[ch];
                       }
                       if (wants(self, 2)) {
                         auto& g = parent(self, 2).ensure_grad();
                         for (std::size_t ch = 0; ch < c; ++ch) g[ch] += sum_dy[ch];
                       }
                       if (!wants(self, 0)) return;
                       auto& dx = parent(self, 0).ensure_grad();
                       const double m = static_cast<double>(count);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const std::size_t off = (i * c + ch) * plane;
                           const double k1 = gm[ch] * inv_std[ch];
                           for (std::size_t k = 0; k < plane; ++k) {
                             if (training)
                               dx[off + k] += k1 / m *
                                              (m * dy[off + k] - sum_dy[ch] - xhat[off + k] * sum_dy_xhat[ch]);
                             else
                               dx[off + k] += k1 * dy[off + k];
                           }
                         }
                     });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check_rank(a, 4, "concat_channels");
  check_rank(b, 4, "concat_channels");
  check_shape(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
              "concat_channels: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), plane = a.dim(2) * a.dim(3);
  std::vector<double> y(n * (ca + cb) * plane);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data().data() + i * ca * plane, ca * plane, y.data() + i * (ca + cb) * plane);
    std::copy_n(b.data().data() + i * cb * plane, cb * plane, y.data() + (i * (ca + cb) + ca) * plane);
  }
  return make_result({n, ca + cb, a.dim(2), a.dim(3)}, std::move(y), {a, b}, [n, ca, cb, plane](Node& self) {
    for (std::size_t i = 0; i < n; ++i) {
      if (wants(self, 0)) {
        auto& g = parent(self, 0).ensure_grad();
        const double* src = self.grad.data() + i * (ca + cb) * plane;
        for (std::size_t k = 0; k < ca * plane; ++k) g[i * ca * plane + k] += src[k];
      }
      if (wants(self, 1)) {
        auto& g = parent(self, 1).ensure_grad();
        const double* src = self.grad.data() + (i * (ca + cb) + ca) * plane;
        for (std::size_t k = 0; k < cb * plane; ++k) g[i * cb * plane + k] += src[k];
      }
    }
  });
}

Tensor film(const Tensor& x, const Tensor& e, const Tensor& w, const Tensor& b) {
  check_rank(x, 4, "film");
  check_rank(e, 2, "film embedding");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  check_shape(e.dim(0) == n, "film: batch of embedding differs from feature map");
  check_shape(w.rank() == 2 && w.dim(0) == 2 * c && w.dim(1) == e.dim(1),
              "film: projection " + shape_str(w.shape()) + " does not map E=" + std::to_string(e.dim(1)) +
                  " to 2C=" + std::to_string(2 * c));
  check_shape(b.numel() == 2 * c, "film: bias size");

  const auto ni = static_cast<Eigen::Index>(n), ei = static_cast<Eigen::Index>(e.dim(1)),
             c2 = static_cast<Eigen::Index>(2 * c);
  std::vector<double> gb(n * 2 * c);
  {
    MapMatrix m(gb.data(), ni, c2);
    m.noalias() = ConstMapMatrix(e.data().data(), ni, ei) * ConstMapMatrix(w.data().data(), c2, ei).transpose();
    for (Eigen::Index r = 0; r < ni; ++r)
      for (Eigen::Index k = 0; k < c2; ++k) m(r, k) += b.data()[static_cast<std::size_t>(k)];
  }
  std::vector<double> y(x.numel());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double gamma = gb[i * 2 * c + ch], beta = gb[i * 2 * c + c + ch];
      const std::size_t off = (i * c + ch) * plane;
      for (std::size_t k = 0; k < plane; ++k) y[off + k] = gamma * x.data()[off + k] + beta;
    }

  return make_result(x.shape(), std::move(y), {x, e, w, b},
                     [gb = std::move(gb), n, c, plane, ni, ei, c2](Node& self) {
                       const auto& xv = parent(self, 0).value;
                       std::vector<double> dgb(n * 2 * c, 0.0);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const std::size_t off = (i * c + ch) * plane;
                           double dg = 0.0, db = 0.0;
                           for (std::size_t k = 0; k < plane; ++k) {
                             dg += self.grad[off + k] * xv[off + k];
                             db += self.grad[off + k];
                           }
                           dgb[i * 2 * c + ch] = dg;
                           dgb[i * 2 * c + c + ch] = db;
                         }
                       if (wants(self, 0)) {
                         auto& dx = parent(self, 0).ensure_grad();
                         for (std::size_t i = 0; i < n; ++i)
                           for (std::size_t ch = 0; ch < c; ++ch) {
                             const double gamma = gb[i * 2 * c + ch];
                             const std::size_t off = (i * c + ch) * plane;
                             for (std::size_t k = 0; k < plane; ++k) dx[off + k] += gamma * self.grad[off + k];
                           }
                       }
                       const ConstMapMatrix d(dgb.data(), ni, c2);
                       if (wants(self, 1)) {
                         MapMatrix de(parent(self, 1).ensure_grad().data(), ni, ei);
                         de.noalias() += d * ConstMapMatrix(parent(self, 2).value.data(), c2, ei);
                       }
                       if (wants(self, 2)) {
                         MapMatrix dw(parent(self, 2).ensure_grad().data(), c2, ei);
                         dw.noalias() += d.transpose() * ConstMapMatrix(parent(self, 1).value.data(), ni, ei);
                       }
                       if (wants(self, 3)) {
                         auto& db = parent(self, 3).ensure_grad();
                         for (Eigen::Index r = 0; r < ni; ++r)
                           for (Eigen::Index k = 0; k < c2; ++k) db[static_cast<std::size_t>(k)] += d(r, k);
                       }
                     });
}

Tensor to_sequence(const Tensor& x) {
  check_rank(x, 4, "to_sequence");
  const std::size_t n = x.dim(0), c = x.dim(1), f = x.dim(2), t = x.dim(3);
  std::vector<double> y(x.numel());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t k = 0; k < f; ++k)
        for (std::size_t s = 0; s < t; ++s)
          y[(s * n + i) * c * f + ch * f + k] = x.data()[((i * c + ch) * f + k) * t + s];
  return make_result({t, n, c * f}, std::move(y), {x}, [n, c, f, t](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t k = 0; k < f; ++k)
          for (std::size_t s = 0; s < t; ++s)
            g[((i * c + ch) * f + k) * t + s] += self.grad[(s * n + i) * c * f + ch * f + k];
  });
}

Tensor spatial_mean(const Tensor& x) {
  check_rank(x, 4, "spatial_mean");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  std::vector<double> y(n * c);
  for (std::size_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < plane; ++k) acc += x.data()[i * plane + k];
    y[i] = acc / static_cast<double>(plane);
  }
  return make_result({n, c}, std::move(y), {x}, [n, c, plane](Node& self) {
    auto& g = parent(self, 0).ensure_grad();
    for (std::size_t i = 0; i < n * c; ++i)
      for (std::size_t k = 0; k < plane; ++k) g[i * plane + k] += self.grad[i] / static_cast<double>(plane);
  });
}

}  // namespace acad::nn

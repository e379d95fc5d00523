// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "acad/core/error.hpp"
#include "acad/nn/ops.hpp"

namespace acad::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

bool wants(Node& self, std::size_t i) { return i < self.parents.size() && self.parents[i]->requires_grad; }

double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Tensor gru(const Tensor& seq, const Tensor& wx, const Tensor& wh, const Tensor& bx, const Tensor& bh) {
  require(seq.defined() && seq.rank() == 3, ErrorCode::ShapeMismatch, "gru: sequence must be [T, N, F]");
  const std::size_t steps = seq.dim(0), n = seq.dim(1), f = seq.dim(2);
  require(wh.rank() == 2 && wh.dim(0) % 3 == 0 && wh.dim(1) * 3 == wh.dim(0), ErrorCode::ShapeMismatch,
          "gru: recurrent weight must be [3H, H]");
  const std::size_t h = wh.dim(1);
  require(wx.rank() == 2 && wx.dim(0) == 3 * h && wx.dim(1) == f, ErrorCode::ShapeMismatch,
          "gru: input weight " + shape_str(wx.shape()) + " vs features " + std::to_string(f));
  require(bx.numel() == 3 * h && bh.numel() == 3 * h, ErrorCode::ShapeMismatch, "gru: bias sizes");
  require(steps >= 1, ErrorCode::ShapeMismatch, "gru: empty sequence");

  const auto ni = static_cast<Eigen::Index>(n), fi = static_cast<Eigen::Index>(f),
             hi = static_cast<Eigen::Index>(h), h3 = static_cast<Eigen::Index>(3 * h);
  const ConstMapMatrix Wx(wx.data().data(), h3, fi);
  const ConstMapMatrix Wh(wh.data().data(), h3, hi);

  // Gate caches per step: r, z, n and the recurrent candidate term (Wh_n h + bh_n).
  const std::size_t step_size = n * h;
  std::vector<double> out(steps * step_size);
  std::vector<double> r_c(steps * step_size), z_c(steps * step_size), n_c(steps * step_size),
      ghn_c(steps * step_size);
  RowMatrix gx(ni, h3), gh(ni, h3);
  std::vector<double> h_prev(step_size, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    gx.noalias() = ConstMapMatrix(seq.data().data() + t * n * f, ni, fi) * Wx.transpose();
    gh.noalias() = ConstMapMatrix(h_prev.data(), ni, hi) * Wh.transpose();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < h; ++k) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto kk = static_cast<Eigen::Index>(k);
        const double ghr = gh(row, kk) + bh.data()[k];
        const double ghz = gh(row, kk + hi) + bh.data()[h + k];
        const double ghn = gh(row, kk + 2 * hi) + bh.data()[2 * h + k];
        const double r = sigm(gx(row, kk) + bx.data()[k] + ghr);
        const double z = sigm(gx(row, kk + hi) + bx.data()[h + k] + ghz);
        const double cand = std::tanh(gx(row, kk + 2 * hi) + bx.data()[2 * h + k] + r * ghn);
        const std::size_t at = t * step_size + i * h + k;
        r_c[at] = r;
        z_c[at] = z;
        n_c[at] = cand;
        ghn_c[at] = ghn;
        out[at] = (1.0 - z) * cand + z * h_prev[i * h + k];
      }
    std::copy_n(out.data() + t * step_size, step_size, h_prev.data());
  }

  return make_result(
      {steps, n, h}, std::move(out), {seq, wx, wh, bx, bh},
      [r_c = std::move(r_c), z_c = std::move(z_c), n_c = std::move(n_c), ghn_c = std::move(ghn_c), steps, n, f, h,
       ni, fi, hi, h3, step_size](Node& self) {
        const auto& xs = self.parents[0]->value;
        const ConstMapMatrix Wx(self.parents[1]->value.data(), h3, fi);
        const ConstMapMatrix Wh(self.parents[2]->value.data(), h3, hi);
        RowMatrix dWx = RowMatrix::Zero(h3, fi), dWh = RowMatrix::Zero(h3, hi);
        Eigen::RowVectorXd dbx = Eigen::RowVectorXd::Zero(h3), dbh = Eigen::RowVectorXd::Zero(h3);
        std::vector<double> dseq(wants(self, 0) ? xs.size() : 0, 0.0);
        RowMatrix dh = RowMatrix::Zero(ni, hi), dgx(ni, h3), dgh(ni, h3), hprev(ni, hi);
        for (std::size_t tt = steps; tt-- > 0;) {
          dh += ConstMapMatrix(self.grad.data() + tt * step_size, ni, hi);
          if (tt == 0)
            hprev.setZero();
          else
            hprev = ConstMapMatrix(self.value.data() + (tt - 1) * step_size, ni, hi);
          RowMatrix dh_prev(ni, hi);
          for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index k = 0; k < hi; ++k) {
              const std::size_t at = tt * step_size + static_cast<std::size_t>(i) * h + static_cast<std::size_t>(k);
              const double r = r_c[at], z = z_c[at], cand = n_c[at], ghn = ghn_c[at];
              const double d = dh(i, k);
              const double dn = d * (1.0 - z);
              const double dz = d * (hprev(i, k) - cand);
              dh_prev(i, k) = d * z;
              const double dan = dn * (1.0 - cand * cand);
              const double dr = dan * ghn;
              const double dar = dr * r * (1.0 - r);
              const double daz = dz * z * (1.0 - z);
              dgx(i, k) = dar;
              dgx(i, k + hi) = daz;
              dgx(i, k + 2 * hi) = dan;
              dgh(i, k) = dar;
              dgh(i, k + hi) = daz;
              dgh(i, k + 2 * hi) = dan * r;
            }
          const ConstMapMatrix xt(xs.data() + tt * n * f, ni, fi);
          dWx.noalias() += dgx.transpose() * xt;
          dWh.noalias() += dgh.transpose() * hprev;
          dbx += dgx.colwise().sum();
          dbh += dgh.colwise().sum();
          if (!dseq.empty()) MapMatrix(dseq.data() + tt * n * f, ni, fi).noalias() = dgx * Wx;
          dh_prev.noalias() += dgh * Wh;
          dh = dh_prev;
        }
        auto add_into = [&](std::size_t idx, const double* src, std::size_t count) {
          if (!wants(self, idx)) return;
          auto& g = self.parents[idx]->ensure_grad();
          for (std::size_t i = 0; i < count; ++i) g[i] += src[i];
        };
        add_into(0, dseq.data(), dseq.size());
        add_into(1, dWx.data(), static_cast<std::size_t>(dWx.size()));
        add_into(2, dWh.data(), static_cast<std::size_t>(dWh.size()));
        add_into(3, dbx.data(), static_cast<std::size_t>(dbx.size()));
        add_into(4, dbh.data(), static_cast<std::size_t>(dbh.size()));
      });
}

namespace {

void check_attention(const Tensor& states, const Tensor& w, const Tensor& b) {
  require(states.defined() && states.rank() == 3 && states.dim(0) >= 1, ErrorCode::ShapeMismatch,
          "attention_pool: states must be [T>=1, N, H]");
  require(w.numel() == states.dim(2) && b.numel() == 1, ErrorCode::ShapeMismatch,
          "attention_pool: score weights must be [H] and bias [1]");
}

// Softmax over time of per-step scores, [T, N].
std::vector<double> softmax_scores(const std::vector<double>& s, const std::vector<double>& w, double b,
                                   std::size_t steps, std::size_t n, std::size_t h) {
  std::vector<double> a(steps * n);
  for (std::size_t i = 0; i < n; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < steps; ++t) {
      double acc = b;
      const double* st = s.data() + (t * n + i) * h;
      for (std::size_t k = 0; k < h; ++k) acc += st[k] * w[k];
      a[t * n + i] = acc;
      peak = std::max(peak, acc);
    }
    double total = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      a[t * n + i] = std::exp(a[t * n + i] - peak);
      total += a[t * n + i];
    }
    for (std::size_t t = 0; t < steps; ++t) a[t * n + i] /= total;
  }
  return a;
}

}  // namespace

std::vector<double> attention_weights(const Tensor& states, const Tensor& w, const Tensor& b) {
  check_attention(states, w, b);
  return softmax_scores(states.data(), w.data(), b.data()[0], states.dim(0), states.dim(1), states.dim(2));
}

Tensor attention_pool(const Tensor& states, const Tensor& w, const Tensor& b) {
  check_attention(states, w, b);
  const std::size_t steps = states.dim(0), n = states.dim(1), h = states.dim(2);
  auto a = softmax_scores(states.data(), w.data(), b.data()[0], steps, n, h);
  std::vector<double> out(n * h, 0.0);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t i = 0; i < n; ++i) {
      const double* st = states.data().data() + (t * n + i) * h;
      for (std::size_t k = 0; k < h; ++k) out[i * h + k] += a[t * n + i] * st[k];
    }
  return make_result({n, h}, std::move(out), {states, w, b}, [a = std::move(a), steps, n, h](Node& self) {
    const auto& s = self.parents[0]->value;
    const auto& wv = self.parents[1]->value;
    // ds[t, n] = a (da - sum_t a da), da[t, n] = state . dout
    std::vector<double> ds(steps * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dout = self.grad.data() + i * h;
      double weighted = 0.0;
      for (std::size_t t = 0; t < steps; ++t) {
        const double* st = s.data() + (t * n + i) * h;
        double da = 0.0;
        for (std::size_t k = 0; k < h; ++k) da += st[k] * dout[k];
        ds[t * n + i] = da;
        weighted += a[t * n + i] * da;
      }
      for (std::size_t t = 0; t < steps; ++t) ds[t * n + i] = a[t * n + i] * (ds[t * n + i] - weighted);
    }
    if (wants(self, 0)) {
      auto& g = self.parents[0]->ensure_grad();
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < n; ++i) {
          double* gs = g.data() + (t * n + i) * h;
          const double* dout = self.grad.data() + i * h;
          for (std::size_t k = 0; k < h; ++k) gs[k] += a[t * n + i] * dout[k] + ds[t * n + i] * wv[k];
        }
    }
    if (wants(self, 1)) {
      auto& g = self.parents[1]->ensure_grad();
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t i = 0; i < n; ++i) {
          const double* st = s.data() + (t * n + i) * h;
          for (std::size_t k = 0; k < h; ++k) g[k] += ds[t * n + i] * st[k];
        }
    }
    if (wants(self, 2)) {
      double acc = 0.0;
      for (double v : ds) acc += v;
      self.parents[2]->ensure_grad()[0] += acc;
    }
  });
}

}  // namespace acad::nn

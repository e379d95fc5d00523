// SPDX-License-Identifier: Apache-2.0
#include "acad/train/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "acad/core/error.hpp"
#include "acad/nn/ops.hpp"

namespace acad::train {

using nn::Node;
using nn::Tensor;

Tensor cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels) {
  require(logits.defined() && logits.rank() == 2 && logits.dim(0) == labels.size() && !labels.empty(),
          ErrorCode::ShapeMismatch, "cross_entropy: logits must be [N, K] with N labels");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  for (auto l : labels)
    require(l < k, ErrorCode::LabelOutOfRange,
            "label " + std::to_string(l) + " outside [0, " + std::to_string(k) + ")");
  std::vector<double> probs(n * k);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = logits.data().data() + i * k;
    const double peak = *std::max_element(z, z + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += std::exp(z[j] - peak);
    const double lse = peak + std::log(total);
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = std::exp(z[j] - lse);
    loss += lse - z[labels[i]];
  }
  loss /= static_cast<double>(n);
  return nn::make_result({1}, {loss}, {logits}, [probs = std::move(probs), labels, n, k](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    const double s = self.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) g[i * k + j] += s * (probs[i * k + j] - (j == labels[i] ? 1.0 : 0.0));
  });
}

Tensor si_snr_loss(const Tensor& reference, const Tensor& estimate, bool zero_mean) {
  require(reference.defined() && estimate.defined() && reference.shape() == estimate.shape() &&
              estimate.rank() == 2,
          ErrorCode::ShapeMismatch, "si_snr_loss: reference and estimate must both be [N, L]");
  const std::size_t n = estimate.dim(0), len = estimate.dim(1);
  constexpr double kDb = 10.0 / std::numbers::ln10;
  std::vector<double> dy(n * len);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(reference.data().begin() + static_cast<std::ptrdiff_t>(i * len),
                          reference.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
    std::vector<double> y(estimate.data().begin() + static_cast<std::ptrdiff_t>(i * len),
                          estimate.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
    if (zero_mean) {
      double mx = 0.0, my = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        mx += x[t];
        my += y[t];
      }
      mx /= static_cast<double>(len);
      my /= static_cast<double>(len);
      for (std::size_t t = 0; t < len; ++t) {
        x[t] -= mx;
        y[t] -= my;
      }
    }
    double xx = 0.0, xy = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      xx += x[t] * x[t];
      xy += x[t] * y[t];
    }
    require(xx > 0.0, ErrorCode::SilentReference, "si_snr_loss: reference clip " + std::to_string(i) + " is silent");
    const double denom = xx + kSiSnrEps;
    const double alpha = xy / denom;
    std::vector<double> e(len);
    double ee = 0.0, ex = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      e[t] = y[t] - alpha * x[t];
      ee += e[t] * e[t];
      ex += e[t] * x[t];
    }
    const double s_energy = alpha * alpha * xx + kSiSnrEps;
    const double e_energy = ee + kSiSnrEps;
    total += -kDb * (std::log(s_energy) - std::log(e_energy));

    // d/dy of S = 2 alpha xx x / denom ; of E = 2 (e - x <e, x> / denom)
    double* g = dy.data() + i * len;
    double gmean = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double ds = 2.0 * alpha * xx * x[t] / denom;
      const double de = 2.0 * (e[t] - x[t] * ex / denom);
      g[t] = -kDb * (ds / s_energy - de / e_energy);
      gmean += g[t];
    }
    if (zero_mean) {
      gmean /= static_cast<double>(len);
      for (std::size_t t = 0; t < len; ++t) g[t] -= gmean;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  // The reference is treated as a constant even if it happens to track gradients.
  return nn::make_result({1}, {total * inv_n}, {estimate}, [dy = std::move(dy), inv_n](Node& self) {
    auto& g = self.parents[0]->ensure_grad();
    const double s = self.grad[0] * inv_n;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * dy[i];
  });
}

Tensor joint_loss(const Tensor& l_asc, const Tensor& l_den, double lambda_asc, double lambda_den) {
  require(lambda_asc >= 0.0 && lambda_den >= 0.0, ErrorCode::InvalidArgument, "loss weights must be >= 0");
  return nn::weighted_sum({l_asc, l_den}, {lambda_asc, lambda_den});
}

}  // namespace acad::train

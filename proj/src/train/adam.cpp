// SPDX-License-Identifier: Apache-2.0
#include "acad/train/adam.hpp"

#include <cmath>

#include "acad/core/error.hpp"

namespace acad::train {

void adam_step(std::vector<double>& param, const std::vector<double>& grad, AdamState& state,
               const AdamConfig& cfg) {
  require(grad.size() == param.size(), ErrorCode::ShapeMismatch, "adam_step: gradient and parameter sizes differ");
  if (state.m.empty()) {
    state.m.assign(param.size(), 0.0);
    state.v.assign(param.size(), 0.0);
  }
  require(state.m.size() == param.size(), ErrorCode::ShapeMismatch, "adam_step: state size differs");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

Adam::Adam(std::vector<nn::Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), states_(params_.size()), cfg_(cfg) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (p.has_grad()) {
      adam_step(p.data(), p.grad(), states_[i], cfg_);
    } else {
      const std::vector<double> zero(p.numel(), 0.0);
      adam_step(p.data(), zero, states_[i], cfg_);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double Adam::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (auto& p : params_)
    if (p.has_grad())
      for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : params_)
      if (p.has_grad())
        for (double& g : p.grad()) g *= s;
  }
  return norm;
}

}  // namespace acad::train

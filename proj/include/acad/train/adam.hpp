// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "acad/nn/tensor.hpp"

namespace acad::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `param` in place.
void adam_step(std::vector<double>& param, const std::vector<double>& grad, AdamState& state,
               const AdamConfig& cfg);

/// Adam over a fixed parameter list. Parameters without a gradient this step
/// are treated as having a zero gradient.
class Adam {
 public:
  Adam(std::vector<nn::Tensor> params, AdamConfig cfg);

  void step();
  void zero_grad();
  /// Scales gradients so their global L2 norm is at most `max_norm`; returns
  /// the norm before clipping.
  double clip_grad_norm(double max_norm);

  const std::vector<nn::Tensor>& params() const { return params_; }

 private:
  std::vector<nn::Tensor> params_;
  std::vector<AdamState> states_;
  AdamConfig cfg_;
};

}  // namespace acad::train

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "acad/nn/tensor.hpp"

namespace acad::train {

inline constexpr double kSiSnrEps = 1e-8;

/// Mean over the batch of -log softmax(logits)[label]; logits [N, K].
nn::Tensor cross_entropy(const nn::Tensor& logits, const std::vector<std::size_t>& labels);

/// Mean over the batch of -SI-SNR in dB. estimate and reference are [N, L];
/// the reference carries no gradient.
nn::Tensor si_snr_loss(const nn::Tensor& reference, const nn::Tensor& estimate, bool zero_mean = true);

/// lambda_asc * l_asc + lambda_den * l_den
nn::Tensor joint_loss(const nn::Tensor& l_asc, const nn::Tensor& l_den, double lambda_asc, double lambda_den);

}  // namespace acad::train

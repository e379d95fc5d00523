// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "acad/nn/tensor.hpp"

namespace acad::nn {

// Elementwise and shape ops. Every op records a closure for reverse mode.

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Weighted sum of scalars: sum_i w_i * s_i.
Tensor weighted_sum(const std::vector<Tensor>& scalars, const std::vector<double>& weights);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor mean(const Tensor& x);

/// x: [N, I], w: [O, I], b: [O] (may be undefined) -> [N, O]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// "Same" convolution, 3x3-style square kernels with pad = k / 2:
/// x [N, Cin, H, W], w [Cout, Cin, k, k], b [Cout] or undefined ->
/// [N, Cout, ceil(H / stride), ceil(W / stride)].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride);

/// Adjoint of conv2d for the given output size: x [N, Cin, h, w],
/// w [Cin, Cout, k, k] -> [N, Cout, out_h, out_w], where a stride-`stride`
/// conv2d of an out_h x out_w input yields h x w.
Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
                        std::size_t out_h, std::size_t out_w);

/// Per-channel batch normalisation of [N, C, H, W]. In training mode batch
/// statistics are used and the running buffers updated in place; otherwise
/// the running statistics normalise.
Tensor batch_norm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                    Tensor& running_var, bool training, double momentum = 0.1, double eps = 1e-5);

/// Concatenates [N, Ca, H, W] and [N, Cb, H, W] along channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Feature-wise linear modulation. (gamma, beta) = e w^T + b, split into the
/// first C and last C columns; out[n, c] = gamma[n, c] x[n, c] + beta[n, c].
/// x [N, C, H, W], e [N, E], w [2C, E], b [2C].
Tensor film(const Tensor& x, const Tensor& e, const Tensor& w, const Tensor& b);

/// [N, C, F, T] -> time-major sequence [T, N, C * F].
Tensor to_sequence(const Tensor& x);

/// Mean over the spatial axes: [N, C, H, W] -> [N, C].
Tensor spatial_mean(const Tensor& x);

/// Unidirectional GRU with zero initial state (gate order r, z, n):
///   r = sig(Wx_r x + bx_r + Wh_r h + bh_r)
///   z = sig(Wx_z x + bx_z + Wh_z h + bh_z)
///   n = tanh(Wx_n x + bx_n + r * (Wh_n h + bh_n))
///   h' = (1 - z) * n + z * h
/// seq [T, N, F], wx [3H, F], wh [3H, H], bx [3H], bh [3H] -> [T, N, H].
Tensor gru(const Tensor& seq, const Tensor& wx, const Tensor& wh, const Tensor& bx, const Tensor& bh);

/// Temporal attention pooling: score_t = states_t . w + b, softmax over t,
/// output = sum_t a_t states_t. states [T, N, H], w [H], b [1] -> [N, H].
Tensor attention_pool(const Tensor& states, const Tensor& w, const Tensor& b);
/// Attention weights [T, N] that attention_pool would use (no graph).
std::vector<double> attention_weights(const Tensor& states, const Tensor& w, const Tensor& b);

}  // namespace acad::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

// Central finite-difference checks of every differentiable op, shared by the
// unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "acad/core/rng.hpp"
#include "acad/nn/ops.hpp"

namespace acad::gradcheck {

using nn::Tensor;
using Fn = std::function<Tensor(std::vector<Tensor>&)>;

inline Tensor random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(nn::numel(shape));
  for (double& x : v) x = scale * rng.normal();
  return Tensor::from(std::move(shape), std::move(v), true);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

/// Worst error over sampled coordinates of all inputs, measured as
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
inline double check(const Fn& f, std::vector<Tensor> inputs, Rng& rng, std::size_t probes_per_input = 24,
                    double h = 1e-5) {
  // The loss is a fixed random projection of the output so every output
  // coordinate contributes.
  auto probe = f(inputs);
  std::vector<double> r(probe.numel());
  for (double& x : r) x = rng.normal();
  const auto weights = Tensor::from(probe.shape(), r);
  auto loss_of = [&](std::vector<Tensor>& in) {
    nn::NoGradGuard no_grad;
    auto y = f(in);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * y.data()[i];
    return s;
  };

  for (auto& t : inputs) t.zero_grad();
  auto y = f(inputs);
  nn::mean(nn::mul(y, weights)).backward();
  const double scale_back = static_cast<double>(y.numel());

  double worst = 0.0;
  for (auto& t : inputs) {
    if (!t.requires_grad()) continue;
    const auto analytic = t.grad();
    const std::size_t n = t.numel();
    const std::size_t probes = std::min(n, probes_per_input);
    for (std::size_t p = 0; p < probes; ++p) {
      const std::size_t i = probes == n ? p : pick(rng, 0, n - 1);
      const double saved = t.data()[i];
      t.data()[i] = saved + h;
      const double up = loss_of(inputs);
      t.data()[i] = saved - h;
      const double down = loss_of(inputs);
      t.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i] * scale_back;
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3}));
    }
  }
  return worst;
}

struct OpResult {
  std::string op;
  std::size_t shapes = 0;
  double worst = 0.0;
};

/// Runs every op over `rounds` random shapes.
inline std::vector<OpResult> run_suite(std::size_t rounds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OpResult> out;
  auto run = [&](const std::string& name, const std::function<double()>& one) {
    OpResult r{name, rounds, 0.0};
    for (std::size_t k = 0; k < rounds; ++k) r.worst = std::max(r.worst, one());
    out.push_back(r);
  };

  run("conv2d", [&] {
    const auto n = pick(rng, 1, 2), ci = pick(rng, 1, 3), co = pick(rng, 1, 3), hh = pick(rng, 3, 7),
               ww = pick(rng, 3, 7), k = pick(rng, 0, 1) ? std::size_t{3} : std::size_t{1}, s = pick(rng, 1, 2);
    return check([s](auto& in) { return nn::conv2d(in[0], in[1], in[2], s); },
                 {random_tensor({n, ci, hh, ww}, rng), random_tensor({co, ci, k, k}, rng), random_tensor({co}, rng)},
                 rng);
  });
  run("conv_transpose2d", [&] {
    const auto n = pick(rng, 1, 2), ci = pick(rng, 1, 3), co = pick(rng, 1, 3), oh = pick(rng, 3, 8),
               ow = pick(rng, 3, 8), s = pick(rng, 1, 2);
    const auto ih = (oh + s - 1) / s, iw = (ow + s - 1) / s;
    return check([s, oh, ow](auto& in) { return nn::conv_transpose2d(in[0], in[1], in[2], s, oh, ow); },
                 {random_tensor({n, ci, ih, iw}, rng), random_tensor({ci, co, 3, 3}, rng), random_tensor({co}, rng)},
                 rng);
  });
  run("linear", [&] {
    const auto n = pick(rng, 1, 4), i = pick(rng, 1, 6), o = pick(rng, 1, 6);
    return check([](auto& in) { return nn::linear(in[0], in[1], in[2]); },
                 {random_tensor({n, i}, rng), random_tensor({o, i}, rng), random_tensor({o}, rng)}, rng);
  });
  run("sigmoid", [&] {
    return check([](auto& in) { return nn::sigmoid(in[0]); }, {random_tensor({pick(rng, 1, 3), pick(rng, 2, 9)}, rng, 2.0)},
                 rng);
  });
  run("relu", [&] {
    // Keep samples away from the kink.
    auto x = random_tensor({pick(rng, 1, 3), pick(rng, 2, 9)}, rng);
    for (double& v : x.data()) v += v >= 0 ? 0.05 : -0.05;
    return check([](auto& in) { return nn::relu(in[0]); }, {x}, rng);
  });
  run("batch_norm2d", [&] {
    const auto n = pick(rng, 2, 3), c = pick(rng, 1, 3), hh = pick(rng, 2, 4), ww = pick(rng, 2, 4);
    auto rm = Tensor::zeros({c}), rv = Tensor::full({c}, 1.0);
    return check([&rm, &rv](auto& in) { return nn::batch_norm2d(in[0], in[1], in[2], rm, rv, true); },
                 {random_tensor({n, c, hh, ww}, rng), random_tensor({c}, rng), random_tensor({c}, rng)}, rng);
  });
  run("film", [&] {
    const auto n = pick(rng, 1, 3), c = pick(rng, 1, 3), e = pick(rng, 1, 5), hh = pick(rng, 1, 4),
               ww = pick(rng, 1, 4);
    return check([](auto& in) { return nn::film(in[0], in[1], in[2], in[3]); },
                 {random_tensor({n, c, hh, ww}, rng), random_tensor({n, e}, rng), random_tensor({2 * c, e}, rng),
                  random_tensor({2 * c}, rng)},
                 rng);
  });
  run("gru", [&] {
    const auto t = pick(rng, 1, 5), n = pick(rng, 1, 3), f = pick(rng, 1, 4), h = pick(rng, 1, 4);
    return check([](auto& in) { return nn::gru(in[0], in[1], in[2], in[3], in[4]); },
                 {random_tensor({t, n, f}, rng), random_tensor({3 * h, f}, rng, 0.5), random_tensor({3 * h, h}, rng, 0.5),
                  random_tensor({3 * h}, rng, 0.5), random_tensor({3 * h}, rng, 0.5)},
                 rng);
  });
  run("attention_pool", [&] {
    const auto t = pick(rng, 1, 6), n = pick(rng, 1, 3), h = pick(rng, 1, 5);
    return check([](auto& in) { return nn::attention_pool(in[0], in[1], in[2]); },
                 {random_tensor({t, n, h}, rng), random_tensor({h}, rng), random_tensor({1}, rng)}, rng);
  });
  run("concat_channels", [&] {
    const auto n = pick(rng, 1, 2), a = pick(rng, 1, 3), b = pick(rng, 1, 3), hh = pick(rng, 1, 4), ww = pick(rng, 1, 4);
    return check([](auto& in) { return nn::concat_channels(in[0], in[1]); },
                 {random_tensor({n, a, hh, ww}, rng), random_tensor({n, b, hh, ww}, rng)}, rng);
  });
  run("to_sequence", [&] {
    return check([](auto& in) { return nn::to_sequence(in[0]); },
                 {random_tensor({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 5)}, rng)}, rng);
  });
  run("spatial_mean", [&] {
    return check([](auto& in) { return nn::spatial_mean(in[0]); },
                 {random_tensor({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 5)}, rng)}, rng);
  });
  run("add_mul_scale", [&] {
    const nn::Shape s{pick(rng, 1, 3), pick(rng, 1, 5)};
    return check([](auto& in) { return nn::scale(nn::add(nn::mul(in[0], in[1]), in[0]), 0.7); },
                 {random_tensor(s, rng), random_tensor(s, rng)}, rng);
  });
  return out;
}

inline constexpr double kTolerance = 1e-3;

}  // namespace acad::gradcheck

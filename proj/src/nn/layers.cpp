// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/layers.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "acad/core/error.hpp"
#include "acad/core/hash.hpp"
#include "acad/nn/ops.hpp"

namespace acad::nn {

std::vector<Tensor> Module::parameters() const {
  std::vector<Tensor> out;
  for (const auto& s : state_)
    if (s.trainable) out.push_back(s.tensor);
  return out;
}

void Module::set_trainable(bool on) {
  for (auto& s : state_)
    if (s.trainable) s.tensor.set_requires_grad(on);
}

void Module::zero_grad() {
  for (auto& s : state_)
    if (s.trainable) s.tensor.zero_grad();
}

std::uint64_t Module::state_hash() const {
  std::uint64_t h = fnv1a(fingerprint());
  for (const auto& s : state_) {
    h = fnv1a(s.name, h);
    h = fnv1a(std::span<const double>(s.tensor.data()), h);
  }
  return h;
}

Tensor Module::register_parameter(const std::string& name, Shape shape) {
  for (const auto& s : state_)
    require(s.name != name, ErrorCode::InvalidArgument, "duplicate parameter name " + name);
  auto t = Tensor::zeros(std::move(shape), true);
  state_.push_back({name, t, true});
  return t;
}

Tensor Module::register_buffer(const std::string& name, Shape shape, double fill) {
  for (const auto& s : state_)
    require(s.name != name, ErrorCode::InvalidArgument, "duplicate buffer name " + name);
  auto t = Tensor::full(std::move(shape), fill, false);
  state_.push_back({name, t, false});
  return t;
}

void kaiming_normal(Tensor& w, std::size_t fan_in, Rng& rng) {
  const double sd = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : w.data()) v = sd * rng.normal();
}

void orthogonal(Tensor& w, Rng& rng) {
  require(w.rank() == 2, ErrorCode::ShapeMismatch, "orthogonal init needs a matrix");
  const auto rows = static_cast<Eigen::Index>(w.dim(0)), cols = static_cast<Eigen::Index>(w.dim(1));
  const Eigen::Index big = std::max(rows, cols), small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (Eigen::Index j = 0; j < small; ++j)
    for (Eigen::Index i = 0; i < big; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // Sign fix so the draw is uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      w.data()[static_cast<std::size_t>(i * cols + j)] = rows >= cols ? q(i, j) : q(j, i);
}

Conv2d::Conv2d(Module& m, const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
               std::size_t stride_, bool with_bias)
    : weight(m.register_parameter(name + ".weight", {cout, cin, kernel, kernel})), stride(stride_) {
  if (with_bias) bias = m.register_parameter(name + ".bias", {cout});
}

Tensor Conv2d::operator()(const Tensor& x) const { return conv2d(x, weight, bias, stride); }

void Conv2d::init(Rng& rng) { kaiming_normal(weight, weight.dim(1) * weight.dim(2) * weight.dim(3), rng); }

ConvTranspose2d::ConvTranspose2d(Module& m, const std::string& name, std::size_t cin, std::size_t cout,
                                 std::size_t kernel, std::size_t stride_, bool with_bias)
    : weight(m.register_parameter(name + ".weight", {cin, cout, kernel, kernel})), stride(stride_) {
  if (with_bias) bias = m.register_parameter(name + ".bias", {cout});
}

Tensor ConvTranspose2d::operator()(const Tensor& x, std::size_t out_h, std::size_t out_w) const {
  return conv_transpose2d(x, weight, bias, stride, out_h, out_w);
}

void ConvTranspose2d::init(Rng& rng) {
  // Each output sees about cin * k * k / stride^2 taps.
  const std::size_t taps = weight.dim(0) * weight.dim(2) * weight.dim(3) / (stride * stride);
  kaiming_normal(weight, taps, rng);
}

BatchNorm2d::BatchNorm2d(Module& m, const std::string& name, std::size_t channels)
    : gamma(m.register_parameter(name + ".gamma", {channels})),
      beta(m.register_parameter(name + ".beta", {channels})),
      running_mean(m.register_buffer(name + ".running_mean", {channels}, 0.0)),
      running_var(m.register_buffer(name + ".running_var", {channels}, 1.0)) {
  std::fill(gamma.data().begin(), gamma.data().end(), 1.0);
}

Tensor BatchNorm2d::operator()(const Tensor& x, bool training) {
  return batch_norm2d(x, gamma, beta, running_mean, running_var, training);
}

Linear::Linear(Module& m, const std::string& name, std::size_t in, std::size_t out)
    : weight(m.register_parameter(name + ".weight", {out, in})), bias(m.register_parameter(name + ".bias", {out})) {}

Tensor Linear::operator()(const Tensor& x) const { return linear(x, weight, bias); }

void Linear::init(Rng& rng) { kaiming_normal(weight, weight.dim(1), rng); }

FilmSite::FilmSite(Module& m, const std::string& name, std::size_t embedding, std::size_t channels_)
    : weight(m.register_parameter(name + ".weight", {2 * channels_, embedding})),
      bias(m.register_parameter(name + ".bias", {2 * channels_})),
      channels(channels_) {
  init();
}

Tensor FilmSite::operator()(const Tensor& x, const Tensor& e) const { return film(x, e, weight, bias); }

void FilmSite::init() {
  std::fill(weight.data().begin(), weight.data().end(), 0.0);
  for (std::size_t c = 0; c < 2 * channels; ++c) bias.data()[c] = c < channels ? 1.0 : 0.0;
}

Gru::Gru(Module& m, const std::string& name, std::size_t in, std::size_t hidden)
    : wx(m.register_parameter(name + ".wx", {3 * hidden, in})),
      wh(m.register_parameter(name + ".wh", {3 * hidden, hidden})),
      bx(m.register_parameter(name + ".bx", {3 * hidden})),
      bh(m.register_parameter(name + ".bh", {3 * hidden})) {}

Tensor Gru::operator()(const Tensor& seq) const { return gru(seq, wx, wh, bx, bh); }

void Gru::init(Rng& rng) {
  const std::size_t h = wh.dim(1), in = wx.dim(1);
  const double sd = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : wx.data()) v = sd * rng.normal();
  // One orthogonal block per gate.
  for (std::size_t gate = 0; gate < 3; ++gate) {
    auto block = Tensor::zeros({h, h});
    orthogonal(block, rng);
    std::copy(block.data().begin(), block.data().end(), wh.data().begin() + static_cast<std::ptrdiff_t>(gate * h * h));
  }
}

AttentionPool::AttentionPool(Module& m, const std::string& name, std::size_t hidden)
    : weight(m.register_parameter(name + ".weight", {hidden})), bias(m.register_parameter(name + ".bias", {1})) {}

Tensor AttentionPool::operator()(const Tensor& states) const { return attention_pool(states, weight, bias); }

void AttentionPool::init(Rng& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(weight.numel()));
  for (double& v : weight.data()) v = sd * rng.normal();
}

ConvBn::ConvBn(Module& m, const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
               std::size_t stride, bool batch_norm)
    : conv(m, name + ".conv", cin, cout, kernel, stride, !batch_norm), use_bn(batch_norm) {
  if (use_bn) bn = BatchNorm2d(m, name + ".bn", cout);
}

Tensor ConvBn::operator()(const Tensor& x, bool training) {
  auto y = conv(x);
  return use_bn ? bn(y, training) : y;
}

}  // namespace acad::nn

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acad/core/rng.hpp"
#include "acad/nn/tensor.hpp"

namespace acad::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

/// Owns an ordered list of named parameters and buffers. Layers hold handles
/// that alias the registered tensors.
class Module {
 public:
  virtual ~Module() = default;
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  const std::vector<NamedTensor>& state() const { return state_; }
  std::vector<Tensor> parameters() const;

  bool training() const { return training_; }
  void set_training(bool on) { training_ = on; }
  /// Turns gradient tracking for every trainable parameter on or off.
  void set_trainable(bool on);
  void zero_grad();

  /// Canonical text identifying the architecture; checkpoints compare it.
  virtual std::string fingerprint() const = 0;
  /// Hash over every parameter and buffer value, in registration order.
  std::uint64_t state_hash() const;

  Tensor register_parameter(const std::string& name, Shape shape);
  Tensor register_buffer(const std::string& name, Shape shape, double fill);

 private:
  std::vector<NamedTensor> state_;
  bool training_ = true;
};

// Initialisers. Kaiming fan-in normal for weights feeding ReLUs.
void kaiming_normal(Tensor& w, std::size_t fan_in, Rng& rng);
/// Fills w [rows, cols] (rows >= cols or rows <= cols) with an orthogonal matrix.
void orthogonal(Tensor& w, Rng& rng);

struct Conv2d {
  Conv2d() = default;
  Conv2d(Module& m, const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
         std::size_t stride, bool bias);
  Tensor operator()(const Tensor& x) const;
  void init(Rng& rng);

  Tensor weight, bias;
  std::size_t stride = 1;
};

/// Upsampling adjoint of a strided conv; the output size is explicit so odd
/// encoder sizes mirror exactly.
struct ConvTranspose2d {
  ConvTranspose2d() = default;
  ConvTranspose2d(Module& m, const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
                  std::size_t stride, bool bias);
  Tensor operator()(const Tensor& x, std::size_t out_h, std::size_t out_w) const;
  void init(Rng& rng);

  Tensor weight, bias;
  std::size_t stride = 2;
};

struct BatchNorm2d {
  BatchNorm2d() = default;
  BatchNorm2d(Module& m, const std::string& name, std::size_t channels);
  Tensor operator()(const Tensor& x, bool training);

  Tensor gamma, beta, running_mean, running_var;
};

struct Linear {
  Linear() = default;
  Linear(Module& m, const std::string& name, std::size_t in, std::size_t out);
  Tensor operator()(const Tensor& x) const;
  void init(Rng& rng);

  Tensor weight, bias;
};

/// One conditioning site: e -> (gamma, beta) per channel, starting at identity.
struct FilmSite {
  FilmSite() = default;
  FilmSite(Module& m, const std::string& name, std::size_t embedding, std::size_t channels);
  Tensor operator()(const Tensor& x, const Tensor& e) const;
  void init();

  Tensor weight, bias;
  std::size_t channels = 0;
};

struct Gru {
  Gru() = default;
  Gru(Module& m, const std::string& name, std::size_t in, std::size_t hidden);
  Tensor operator()(const Tensor& seq) const;
  void init(Rng& rng);

  Tensor wx, wh, bx, bh;
};

struct AttentionPool {
  AttentionPool() = default;
  AttentionPool(Module& m, const std::string& name, std::size_t hidden);
  Tensor operator()(const Tensor& states) const;
  void init(Rng& rng);

  Tensor weight, bias;
};

/// Conv, optional batch norm; the conv carries a bias only without BN.
struct ConvBn {
  ConvBn() = default;
  ConvBn(Module& m, const std::string& name, std::size_t cin, std::size_t cout, std::size_t kernel,
         std::size_t stride, bool batch_norm);
  Tensor operator()(const Tensor& x, bool training);
  void init(Rng& rng) { conv.init(rng); }

  Conv2d conv;
  BatchNorm2d bn;
  bool use_bn = true;
};

}  // namespace acad::nn

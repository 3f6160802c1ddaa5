// sff/nn/layers.h
//
// Copyright 2026 The sffser Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// The layer zoo for the CNN-block architecture: valid 2-D convolution, batch
// normalization, ReLU, adaptive max pooling, dense, dropout, softmax and the
// class-weighted cross-entropy loss, each with an exact backward pass.

#pragma once

#include <cstdint>
#include <vector>

#include "sff/nn/tensor.h"
#include "sff/rng.h"

namespace sff::nn {

// ---------------------------------------------------------------------------
// Functional core. All shapes are checked; every backward is the exact
// adjoint of its forward.

// Valid cross-correlation, stride 1, no padding. x [N,C,H,W], kernels
// [O,C,kh,kw], bias [O] -> [N,O,H-kh+1,W-kw+1].
Tensor conv2d_forward(const Tensor& x, const Tensor& kernels,
                      const std::vector<double>& bias);
void conv2d_backward(const Tensor& x, const Tensor& kernels, const Tensor& dout,
                     Tensor* dx, Tensor* dkernels, std::vector<double>* dbias);

// Elementwise max(x, 0).
Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& dout);

// Partition the input plane into out_h x out_w contiguous patches with
// boundaries at floor(i*H/out_h) and take the per-patch maximum. argmax
// holds the flat input offset of each output element's source.
Tensor adaptive_maxpool_forward(const Tensor& x, std::size_t out_h, std::size_t out_w,
                                std::vector<std::size_t>* argmax);
Tensor adaptive_maxpool_backward(const Tensor& x, const Tensor& dout,
                                 const std::vector<std::size_t>& argmax);

// y = W x + b. x [N,in], weights [out,in], bias [out] -> [N,out].
Tensor dense_forward(const Tensor& x, const Tensor& weights,
                     const std::vector<double>& bias);
void dense_backward(const Tensor& x, const Tensor& weights, const Tensor& dout,
                    Tensor* dx, Tensor* dweights, std::vector<double>* dbias);

// Row softmax with max subtraction. logits [N,C] -> probabilities [N,C].
Tensor softmax_rows(const Tensor& logits);

constexpr double kLossLogFloor = 1e-12;

// Mean over the batch of -w[target] * ln(p[target]) with the probability
// floored at kLossLogFloor. When dlogits is non-null it receives the exact
// gradient with respect to the *logits* that produced `probs`.
double weighted_cross_entropy(const Tensor& probs, const std::vector<int>& targets,
                              const std::vector<double>& class_weights,
                              Tensor* dlogits);

// ---------------------------------------------------------------------------
// Stateful layers used by the model. Each caches what its backward needs.

struct Conv2d {
  std::size_t in_channels = 0, out_channels = 0, kernel_h = 0, kernel_w = 0;
  Tensor weights;             // [out, in, kh, kw]
  std::vector<double> bias;   // [out]
  Tensor dweights;
  std::vector<double> dbias;
  Tensor x_cache;

  Conv2d() = default;
  Conv2d(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw);
  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dout);
};

struct BatchNorm2d {
  std::size_t channels = 0;
  double epsilon = 1e-5;
  double momentum = 0.9;  // running = momentum * running + (1-momentum) * batch
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  std::vector<double> dgamma, dbeta;
  // train-pass caches
  Tensor x_hat_cache;
  std::vector<double> inv_std_cache;

  BatchNorm2d() = default;
  explicit BatchNorm2d(std::size_t channels, double epsilon = 1e-5,
                       double momentum = 0.9);
  // Train mode standardizes over batch and spatial dims (batch size >= 2
  // required) and updates the running statistics; infer mode uses them.
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dout);
};

struct Relu {
  Tensor x_cache;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dout) const;
};

struct AdaptiveMaxPool {
  std::size_t out_h = 0, out_w = 0;
  std::vector<std::size_t> argmax_cache;
  Tensor x_cache;

  AdaptiveMaxPool() = default;
  AdaptiveMaxPool(std::size_t oh, std::size_t ow) : out_h(oh), out_w(ow) {}
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dout) const;
};

struct Dense {
  std::size_t in_features = 0, out_features = 0;
  Tensor weights;  // [out, in]
  std::vector<double> bias;
  Tensor dweights;
  std::vector<double> dbias;
  Tensor x_cache;

  Dense() = default;
  Dense(std::size_t in_f, std::size_t out_f);
  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dout);
};

// Inverted dropout: surviving activations are scaled by 1/(1-rate) during
// training so inference is the identity.
struct Dropout {
  double rate = 0.5;
  std::vector<double> mask_cache;

  Tensor forward(const Tensor& x, bool train, Rng* rng);
  Tensor backward(const Tensor& dout) const;
};

}  // namespace sff::nn

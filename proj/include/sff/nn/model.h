// sff/nn/model.h
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
// The configurable CNN-block classifier: repeated (conv -> BN -> ReLU ->
// adaptive max pool) blocks, a dense layer, dropout, and a softmax output,
// trained with Adam on class-weighted cross-entropy.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sff/nn/layers.h"
#include "sff/nn/tensor.h"
#include "sff/rng.h"

namespace sff::nn {

struct BlockSpec {
  std::size_t channels = 0;
  std::size_t kernel_h = 0, kernel_w = 0;
  std::size_t pool_h = 0, pool_w = 0;  // adaptive pool target output size
};

struct ModelConfig {
  std::size_t input_h = 200;
  std::size_t input_w = 1077;
  std::size_t input_channels = 1;
  std::vector<BlockSpec> blocks = {
      {16, 12, 16, 90, 135},
      {24, 8, 12, 34, 50},
      {32, 5, 7, 6, 8},
  };
  std::size_t dense_width = 64;
  std::size_t num_classes = 4;
  double dropout_rate = 0.5;
  bool dense_relu = true;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.9;

  // Canonical text form; its hash is the checkpoint compatibility digest.
  std::string canonical() const;
  std::uint64_t digest() const;
};

struct StageShape {
  std::string name;
  std::size_t h = 0, w = 0, c = 0;
};

// Per-stage output shapes for the configured stack, input included. Throws
// ShapeError naming the first stage whose geometry cannot work.
std::vector<StageShape> stage_shapes(const ModelConfig& config);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One named parameter (or statistic) with optional gradient storage.
struct ParamRef {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;  // null for running statistics
};

class Model {
 public:
  explicit Model(ModelConfig config);

  // Fan-in-scaled uniform weights, zero biases, identity batch norm.
  void init_params(Rng& rng);

  // x is [N, input_channels, input_h, input_w]; returns probabilities [N, C].
  // Dropout draws come from `dropout_rng` in training mode only.
  Tensor forward(const Tensor& x, bool train, Rng* dropout_rng = nullptr);

  // Batch-mean weighted cross-entropy; fills every parameter gradient by
  // exact backpropagation. Requires a prior forward(train=true) on the batch.
  double loss_and_backward(const Tensor& probs, const std::vector<int>& targets,
                           const std::vector<double>& class_weights);

  // Loss value alone (no gradients); probs may come from either mode.
  static double loss_value(const Tensor& probs, const std::vector<int>& targets,
                           const std::vector<double>& class_weights);

  // Adam update over every parameter, Eqs. m/v accumulation with bias
  // correction. Throws Error on a non-finite gradient.
  void adam_step(const AdamConfig& config);

  std::uint64_t adam_t() const { return adam_t_; }

  // Learnable parameters (with grads), in a stable order.
  std::vector<ParamRef> params();
  // Parameters, BN running statistics, Adam moments, and the step counter;
  // everything a checkpoint round-trips.
  std::vector<ParamRef> named_state();

  // Called by the checkpoint reader once the state tensors are filled in.
  void finish_state_load() {
    adam_t_ = static_cast<std::uint64_t>(adam_t_mirror_[0]);
  }

  const ModelConfig& config() const { return config_; }

 private:
  struct Block {
    Conv2d conv;
    BatchNorm2d bn;
    Relu relu;
    AdaptiveMaxPool pool;
  };

  ModelConfig config_;
  std::vector<Block> blocks_;
  Dense dense1_;
  Relu dense_relu_;
  Dropout dropout_;
  Dense dense2_;

  bool forward_was_train_ = false;
  std::vector<std::size_t> flatten_shape_;

  // Adam state, aligned with params() order.
  std::vector<std::vector<double>> adam_m_;
  std::vector<std::vector<double>> adam_v_;
  std::uint64_t adam_t_ = 0;
  // Flat copies so the step counter serializes like any other tensor.
  std::vector<double> adam_t_mirror_{0.0};
};

}  // namespace sff::nn

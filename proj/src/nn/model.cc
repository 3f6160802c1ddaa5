// sff/nn/model.cc
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

#include "sff/nn/model.h"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sff::nn {

std::string ModelConfig::canonical() const {
  std::ostringstream s;
  s.precision(17);
  s << "in:" << input_channels << "x" << input_h << "x" << input_w << ";blocks:";
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const BlockSpec& b = blocks[i];
    if (i) s << "|";
    s << b.channels << "," << b.kernel_h << "x" << b.kernel_w << "->" << b.pool_h
      << "x" << b.pool_w;
  }
  s << ";dense:" << dense_width << ";relu:" << (dense_relu ? 1 : 0)
    << ";dropout:" << dropout_rate << ";classes:" << num_classes
    << ";bn:" << bn_epsilon << "," << bn_momentum;
  return s.str();
}

std::uint64_t ModelConfig::digest() const {
  // FNV-1a 64-bit over the canonical string.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical()) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<StageShape> stage_shapes(const ModelConfig& config) {
  std::vector<StageShape> stages;
  if (config.blocks.empty()) throw ConfigError("model needs at least one block");
  if (config.num_classes < 2) throw ConfigError("model needs at least two classes");

  std::size_t h = config.input_h, w = config.input_w, c = config.input_channels;
  stages.push_back({"input", h, w, c});
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const BlockSpec& b = config.blocks[i];
    const std::string tag = "block" + std::to_string(i + 1);
    if (b.kernel_h > h || b.kernel_w > w) {
      throw ShapeError(tag + " conv: kernel " + std::to_string(b.kernel_h) + "x" +
                       std::to_string(b.kernel_w) + " exceeds input " +
                       std::to_string(h) + "x" + std::to_string(w));
    }
    h = h - b.kernel_h + 1;
    w = w - b.kernel_w + 1;
    c = b.channels;
    stages.push_back({tag + ".conv", h, w, c});
    if (b.pool_h == 0 || b.pool_w == 0 || b.pool_h > h || b.pool_w > w ||
        b.pool_h * b.pool_w >= h * w) {
      throw ShapeError(tag + " pool: target " + std::to_string(b.pool_h) + "x" +
                       std::to_string(b.pool_w) +
                       " must be strictly smaller than its input " +
                       std::to_string(h) + "x" + std::to_string(w));
    }
    h = b.pool_h;
    w = b.pool_w;
    stages.push_back({tag + ".pool", h, w, c});
  }
  stages.push_back({"dense", 1, 1, config.dense_width});
  stages.push_back({"output", 1, 1, config.num_classes});
  return stages;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  stage_shapes(config_);  // validates the geometry up front

  std::size_t in_c = config_.input_channels;
  for (const BlockSpec& b : config_.blocks) {
    Block block;
    block.conv = Conv2d(in_c, b.channels, b.kernel_h, b.kernel_w);
    block.bn = BatchNorm2d(b.channels, config_.bn_epsilon, config_.bn_momentum);
    block.pool = AdaptiveMaxPool(b.pool_h, b.pool_w);
    blocks_.push_back(std::move(block));
    in_c = b.channels;
  }
  const BlockSpec& last = config_.blocks.back();
  const std::size_t flat = last.channels * last.pool_h * last.pool_w;
  dense1_ = Dense(flat, config_.dense_width);
  dropout_.rate = config_.dropout_rate;
  dense2_ = Dense(config_.dense_width, config_.num_classes);

  for (const ParamRef& p : params()) {
    adam_m_.emplace_back(p.value->size(), 0.0);
    adam_v_.emplace_back(p.value->size(), 0.0);
  }
}

void Model::init_params(Rng& rng) {
  for (Block& b : blocks_) b.conv.init(rng);
  dense1_.init(rng);
  dense2_.init(rng);
}

Tensor Model::forward(const Tensor& x, bool train, Rng* dropout_rng) {
  if (x.shape.size() != 4 || x.dim(1) != config_.input_channels ||
      x.dim(2) != config_.input_h || x.dim(3) != config_.input_w) {
    throw ShapeError("model input: expected [N," + std::to_string(config_.input_channels) +
                     "," + std::to_string(config_.input_h) + "," +
                     std::to_string(config_.input_w) + "], got " + x.shape_string());
  }
  forward_was_train_ = train;

  Tensor t = x;
  for (Block& b : blocks_) {
    t = b.conv.forward(t);
    t = b.bn.forward(t, train);
    t = b.relu.forward(t);
    t = b.pool.forward(t);
  }

  flatten_shape_ = t.shape;
  Tensor flat({t.dim(0), t.dim(1) * t.dim(2) * t.dim(3)});
  flat.data = std::move(t.data);
  flat = dense1_.forward(flat);
  if (config_.dense_relu) flat = dense_relu_.forward(flat);
  flat = dropout_.forward(flat, train, dropout_rng);
  Tensor logits = dense2_.forward(flat);
  return softmax_rows(logits);
}

double Model::loss_value(const Tensor& probs, const std::vector<int>& targets,
                         const std::vector<double>& class_weights) {
  return weighted_cross_entropy(probs, targets, class_weights, nullptr);
}

double Model::loss_and_backward(const Tensor& probs, const std::vector<int>& targets,
                                const std::vector<double>& class_weights) {
  if (!forward_was_train_) {
    throw Error("loss_and_backward requires a forward pass in training mode");
  }
  Tensor dlogits;
  const double loss = weighted_cross_entropy(probs, targets, class_weights, &dlogits);

  Tensor d = dense2_.backward(dlogits);
  d = dropout_.backward(d);
  if (config_.dense_relu) d = dense_relu_.backward(d);
  d = dense1_.backward(d);

  Tensor d4(flatten_shape_);
  d4.data = std::move(d.data);
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    Block& b = blocks_[i];
    d4 = b.pool.backward(d4);
    d4 = b.relu.backward(d4);
    d4 = b.bn.backward(d4);
    d4 = b.conv.backward(d4);
  }
  return loss;
}

std::vector<ParamRef> Model::params() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string tag = "block" + std::to_string(i + 1);
    Block& b = blocks_[i];
    out.push_back({tag + ".conv.weight", &b.conv.weights.data, &b.conv.dweights.data});
    out.push_back({tag + ".conv.bias", &b.conv.bias, &b.conv.dbias});
    out.push_back({tag + ".bn.gamma", &b.bn.gamma, &b.bn.dgamma});
    out.push_back({tag + ".bn.beta", &b.bn.beta, &b.bn.dbeta});
  }
  out.push_back({"dense1.weight", &dense1_.weights.data, &dense1_.dweights.data});
  out.push_back({"dense1.bias", &dense1_.bias, &dense1_.dbias});
  out.push_back({"dense2.weight", &dense2_.weights.data, &dense2_.dweights.data});
  out.push_back({"dense2.bias", &dense2_.bias, &dense2_.dbias});
  return out;
}

std::vector<ParamRef> Model::named_state() {
  std::vector<ParamRef> out = params();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string tag = "block" + std::to_string(i + 1);
    Block& b = blocks_[i];
    out.push_back({tag + ".bn.running_mean", &b.bn.running_mean, nullptr});
    out.push_back({tag + ".bn.running_var", &b.bn.running_var, nullptr});
  }
  std::vector<ParamRef> learnable = params();
  for (std::size_t i = 0; i < learnable.size(); ++i) {
    out.push_back({"adam.m." + learnable[i].name, &adam_m_[i], nullptr});
    out.push_back({"adam.v." + learnable[i].name, &adam_v_[i], nullptr});
  }
  adam_t_mirror_[0] = static_cast<double>(adam_t_);
  out.push_back({"adam.t", &adam_t_mirror_, nullptr});
  return out;
}

void Model::adam_step(const AdamConfig& cfg) {
  std::vector<ParamRef> ps = params();
  adam_t_ += 1;
  const auto t = static_cast<double>(adam_t_);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<double>& theta = *ps[i].value;
    const std::vector<double>& g = *ps[i].grad;
    std::vector<double>& m = adam_m_[i];
    std::vector<double>& v = adam_v_[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (!std::isfinite(g[j])) {
        throw Error("non-finite gradient in " + ps[i].name + "[" + std::to_string(j) +
                    "] at step " + std::to_string(adam_t_));
      }
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace sff::nn

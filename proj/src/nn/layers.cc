// sff/nn/layers.cc
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

#include "sff/nn/layers.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace sff::nn {

namespace {

void check_4d(const Tensor& t, const char* who) {
  if (t.shape.size() != 4) {
    throw ShapeError(std::string(who) + ": expected a 4-D tensor, got " +
                     t.shape_string());
  }
}

void check_2d(const Tensor& t, const char* who) {
  if (t.shape.size() != 2) {
    throw ShapeError(std::string(who) + ": expected a 2-D tensor, got " +
                     t.shape_string());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Convolution

Tensor conv2d_forward(const Tensor& x, const Tensor& kernels,
                      const std::vector<double>& bias) {
  check_4d(x, "conv2d");
  check_4d(kernels, "conv2d kernels");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = kernels.dim(0), kc = kernels.dim(1);
  const std::size_t kh = kernels.dim(2), kw = kernels.dim(3);
  if (kc != c) {
    throw ShapeError("conv2d: kernel channels " + std::to_string(kc) +
                     " vs input channels " + std::to_string(c));
  }
  if (kh > h || kw > w) {
    throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                     " larger than input " + std::to_string(h) + "x" + std::to_string(w));
  }
  if (bias.size() != o) throw ShapeError("conv2d: bias size mismatch");

  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  Tensor out({n, o, oh, ow});
  for (std::size_t in = 0; in < n; ++in) {
    for (std::size_t oc = 0; oc < o; ++oc) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t xx = 0; xx < ow; ++xx) {
          double acc = bias[oc];
          for (std::size_t ic = 0; ic < c; ++ic) {
            const double* xp = &x.data[x.at4(in, ic, y, xx)];
            const double* kp = &kernels.data[kernels.at4(oc, ic, 0, 0)];
            for (std::size_t i = 0; i < kh; ++i) {
              const double* xrow = xp + i * w;
              const double* krow = kp + i * kw;
              for (std::size_t j = 0; j < kw; ++j) acc += xrow[j] * krow[j];
            }
          }
          out.data[out.at4(in, oc, y, xx)] = acc;
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& kernels, const Tensor& dout,
                     Tensor* dx, Tensor* dkernels, std::vector<double>* dbias) {
  const std::size_t n = x.dim(0), c = x.dim(1), w = x.dim(3);
  const std::size_t o = kernels.dim(0);
  const std::size_t kh = kernels.dim(2), kw = kernels.dim(3);
  const std::size_t oh = dout.dim(2), ow = dout.dim(3);

  if (dbias) {
    dbias->assign(o, 0.0);
    for (std::size_t in = 0; in < n; ++in) {
      for (std::size_t oc = 0; oc < o; ++oc) {
        const double* dp = &dout.data[dout.at4(in, oc, 0, 0)];
        double acc = 0.0;
        for (std::size_t i = 0; i < oh * ow; ++i) acc += dp[i];
        (*dbias)[oc] += acc;
      }
    }
  }

  if (dkernels) {
    *dkernels = Tensor(kernels.shape);
    for (std::size_t in = 0; in < n; ++in) {
      for (std::size_t oc = 0; oc < o; ++oc) {
        for (std::size_t ic = 0; ic < c; ++ic) {
          for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
              double acc = 0.0;
              for (std::size_t y = 0; y < oh; ++y) {
                const double* xrow = &x.data[x.at4(in, ic, y + i, j)];
                const double* drow = &dout.data[dout.at4(in, oc, y, 0)];
                for (std::size_t xx = 0; xx < ow; ++xx) acc += xrow[xx] * drow[xx];
              }
              dkernels->data[dkernels->at4(oc, ic, i, j)] += acc;
            }
          }
        }
      }
    }
  }

  if (dx) {
    *dx = Tensor(x.shape);
    for (std::size_t in = 0; in < n; ++in) {
      for (std::size_t oc = 0; oc < o; ++oc) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t xx = 0; xx < ow; ++xx) {
            const double g = dout.data[dout.at4(in, oc, y, xx)];
            if (g == 0.0) continue;
            for (std::size_t ic = 0; ic < c; ++ic) {
              double* xp = &dx->data[dx->at4(in, ic, y, xx)];
              const double* kp = &kernels.data[kernels.at4(oc, ic, 0, 0)];
              for (std::size_t i = 0; i < kh; ++i) {
                double* xrow = xp + i * w;
                const double* krow = kp + i * kw;
                for (std::size_t j = 0; j < kw; ++j) xrow[j] += g * krow[j];
              }
            }
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// ReLU

Tensor relu_forward(const Tensor& x) {
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = std::max(x.data[i], 0.0);
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& dout) {
  Tensor dx(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx.data[i] = x.data[i] > 0.0 ? dout.data[i] : 0.0;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Adaptive max pooling

Tensor adaptive_maxpool_forward(const Tensor& x, std::size_t out_h, std::size_t out_w,
                                std::vector<std::size_t>* argmax) {
  check_4d(x, "maxpool");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_h == 0 || out_w == 0) throw ShapeError("maxpool: zero output dimension");
  if (out_h > h || out_w > w) {
    throw ShapeError("maxpool: output " + std::to_string(out_h) + "x" +
                     std::to_string(out_w) + " exceeds input " + std::to_string(h) +
                     "x" + std::to_string(w));
  }

  Tensor out({n, c, out_h, out_w});
  if (argmax) argmax->assign(out.size(), 0);
  for (std::size_t in = 0; in < n; ++in) {
    for (std::size_t ic = 0; ic < c; ++ic) {
      for (std::size_t oy = 0; oy < out_h; ++oy) {
        const std::size_t y0 = oy * h / out_h;
        const std::size_t y1 = (oy + 1) * h / out_h;
        for (std::size_t ox = 0; ox < out_w; ++ox) {
          const std::size_t x0 = ox * w / out_w;
          const std::size_t x1 = (ox + 1) * w / out_w;
          std::size_t best_idx = x.at4(in, ic, y0, x0);
          double best = x.data[best_idx];
          for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t xx = x0; xx < x1; ++xx) {
              const std::size_t idx = x.at4(in, ic, y, xx);
              if (x.data[idx] > best) {
                best = x.data[idx];
                best_idx = idx;
              }
            }
          }
          const std::size_t out_idx = out.at4(in, ic, oy, ox);
          out.data[out_idx] = best;
          if (argmax) (*argmax)[out_idx] = best_idx;
        }
      }
    }
  }
  return out;
}

Tensor adaptive_maxpool_backward(const Tensor& x, const Tensor& dout,
                                 const std::vector<std::size_t>& argmax) {
  Tensor dx(x.shape);
  for (std::size_t i = 0; i < dout.size(); ++i) dx.data[argmax[i]] += dout.data[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

Tensor dense_forward(const Tensor& x, const Tensor& weights,
                     const std::vector<double>& bias) {
  check_2d(x, "dense");
  check_2d(weights, "dense weights");
  const std::size_t n = x.dim(0), in_f = x.dim(1);
  const std::size_t out_f = weights.dim(0);
  if (weights.dim(1) != in_f) {
    throw ShapeError("dense: weights expect " + std::to_string(weights.dim(1)) +
                     " inputs, got " + std::to_string(in_f));
  }
  if (bias.size() != out_f) throw ShapeError("dense: bias size mismatch");

  Tensor out({n, out_f});
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &x.data[i * in_f];
    for (std::size_t oo = 0; oo < out_f; ++oo) {
      const double* wrow = &weights.data[oo * in_f];
      double acc = bias[oo];
      for (std::size_t j = 0; j < in_f; ++j) acc += wrow[j] * xi[j];
      out.data[i * out_f + oo] = acc;
    }
  }
  return out;
}

void dense_backward(const Tensor& x, const Tensor& weights, const Tensor& dout,
                    Tensor* dx, Tensor* dweights, std::vector<double>* dbias) {
  const std::size_t n = x.dim(0), in_f = x.dim(1), out_f = weights.dim(0);
  if (dbias) {
    dbias->assign(out_f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t oo = 0; oo < out_f; ++oo) (*dbias)[oo] += dout.data[i * out_f + oo];
    }
  }
  if (dweights) {
    *dweights = Tensor(weights.shape);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = &x.data[i * in_f];
      for (std::size_t oo = 0; oo < out_f; ++oo) {
        const double g = dout.data[i * out_f + oo];
        if (g == 0.0) continue;
        double* wrow = &dweights->data[oo * in_f];
        for (std::size_t j = 0; j < in_f; ++j) wrow[j] += g * xi[j];
      }
    }
  }
  if (dx) {
    *dx = Tensor(x.shape);
    for (std::size_t i = 0; i < n; ++i) {
      double* dxi = &dx->data[i * in_f];
      for (std::size_t oo = 0; oo < out_f; ++oo) {
        const double g = dout.data[i * out_f + oo];
        if (g == 0.0) continue;
        const double* wrow = &weights.data[oo * in_f];
        for (std::size_t j = 0; j < in_f; ++j) dxi[j] += g * wrow[j];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Softmax and loss

Tensor softmax_rows(const Tensor& logits) {
  check_2d(logits, "softmax");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  Tensor out({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = &logits.data[i * c];
    double zmax = z[0];
    for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    double* p = &out.data[i * c];
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (std::size_t j = 0; j < c; ++j) p[j] /= sum;
  }
  return out;
}

double weighted_cross_entropy(const Tensor& probs, const std::vector<int>& targets,
                              const std::vector<double>& class_weights,
                              Tensor* dlogits) {
  check_2d(probs, "cross entropy");
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  if (targets.size() != n) throw ShapeError("cross entropy: target count mismatch");
  if (class_weights.size() != c) throw ShapeError("cross entropy: weight count mismatch");

  if (dlogits) *dlogits = Tensor({n, c});
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= c) {
      throw DataError("target class " + std::to_string(t) + " out of range");
    }
    const double wt = class_weights[static_cast<std::size_t>(t)];
    loss -= wt * std::log(std::max(probs.data[i * c + static_cast<std::size_t>(t)],
                                   kLossLogFloor));
    if (dlogits) {
      for (std::size_t j = 0; j < c; ++j) {
        const double y = (static_cast<std::size_t>(t) == j) ? 1.0 : 0.0;
        dlogits->data[i * c + j] =
            wt * (probs.data[i * c + j] - y) / static_cast<double>(n);
      }
    }
  }
  return loss / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Stateful layers

Conv2d::Conv2d(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw)
    : in_channels(in_c),
      out_channels(out_c),
      kernel_h(kh),
      kernel_w(kw),
      weights({out_c, in_c, kh, kw}),
      bias(out_c, 0.0),
      dweights({out_c, in_c, kh, kw}),
      dbias(out_c, 0.0) {}

void Conv2d::init(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels * kernel_h * kernel_w);
  const double limit = std::sqrt(3.0 / fan_in);
  for (double& v : weights.data) v = rng.uniform(-limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x) {
  x_cache = x;
  return conv2d_forward(x, weights, bias);
}

Tensor Conv2d::backward(const Tensor& dout) {
  if (x_cache.size() == 0) throw Error("conv backward without a cached forward");
  Tensor dx;
  conv2d_backward(x_cache, weights, dout, &dx, &dweights, &dbias);
  return dx;
}

BatchNorm2d::BatchNorm2d(std::size_t ch, double eps, double mom)
    : channels(ch),
      epsilon(eps),
      momentum(mom),
      gamma(ch, 1.0),
      beta(ch, 0.0),
      running_mean(ch, 0.0),
      running_var(ch, 1.0),
      dgamma(ch, 0.0),
      dbeta(ch, 0.0) {}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  check_4d(x, "batchnorm");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (c != channels) throw ShapeError("batchnorm: channel count mismatch");
  const std::size_t plane = h * w;
  const double m = static_cast<double>(n * plane);

  Tensor out(x.shape);
  if (train) {
    if (n < 2) throw DataError("batch normalization needs batch size >= 2 in training");
    x_hat_cache = Tensor(x.shape);
    inv_std_cache.assign(c, 0.0);
    for (std::size_t ic = 0; ic < c; ++ic) {
      double mean = 0.0;
      for (std::size_t in = 0; in < n; ++in) {
        const double* p = &x.data[x.at4(in, ic, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) mean += p[i];
      }
      mean /= m;
      double var = 0.0;
      for (std::size_t in = 0; in < n; ++in) {
        const double* p = &x.data[x.at4(in, ic, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - mean;
          var += d * d;
        }
      }
      var /= m;  // biased, as in the normalization itself
      const double inv_std = 1.0 / std::sqrt(var + epsilon);
      inv_std_cache[ic] = inv_std;
      for (std::size_t in = 0; in < n; ++in) {
        const double* p = &x.data[x.at4(in, ic, 0, 0)];
        double* xh = &x_hat_cache.data[x_hat_cache.at4(in, ic, 0, 0)];
        double* op = &out.data[out.at4(in, ic, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) {
          xh[i] = (p[i] - mean) * inv_std;
          op[i] = gamma[ic] * xh[i] + beta[ic];
        }
      }
      running_mean[ic] = momentum * running_mean[ic] + (1.0 - momentum) * mean;
      running_var[ic] = momentum * running_var[ic] + (1.0 - momentum) * var;
    }
  } else {
    for (std::size_t ic = 0; ic < c; ++ic) {
      const double inv_std = 1.0 / std::sqrt(running_var[ic] + epsilon);
      for (std::size_t in = 0; in < n; ++in) {
        const double* p = &x.data[x.at4(in, ic, 0, 0)];
        double* op = &out.data[out.at4(in, ic, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) {
          op[i] = gamma[ic] * (p[i] - running_mean[ic]) * inv_std + beta[ic];
        }
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& dout) {
  if (x_hat_cache.size() == 0) throw Error("batchnorm backward without a train forward");
  const std::size_t n = dout.dim(0), c = dout.dim(1), h = dout.dim(2), w = dout.dim(3);
  const std::size_t plane = h * w;
  const double m = static_cast<double>(n * plane);

  Tensor dx(dout.shape);
  for (std::size_t ic = 0; ic < c; ++ic) {
    double sum_dout = 0.0, sum_dout_xhat = 0.0;
    for (std::size_t in = 0; in < n; ++in) {
      const double* dp = &dout.data[dout.at4(in, ic, 0, 0)];
      const double* xh = &x_hat_cache.data[x_hat_cache.at4(in, ic, 0, 0)];
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dout += dp[i];
        sum_dout_xhat += dp[i] * xh[i];
      }
    }
    dgamma[ic] = sum_dout_xhat;
    dbeta[ic] = sum_dout;
    const double scale = gamma[ic] * inv_std_cache[ic];
    const double mean_dout = sum_dout / m;
    const double mean_dout_xhat = sum_dout_xhat / m;
    for (std::size_t in = 0; in < n; ++in) {
      const double* dp = &dout.data[dout.at4(in, ic, 0, 0)];
      const double* xh = &x_hat_cache.data[x_hat_cache.at4(in, ic, 0, 0)];
      double* dxp = &dx.data[dx.at4(in, ic, 0, 0)];
      for (std::size_t i = 0; i < plane; ++i) {
        dxp[i] = scale * (dp[i] - mean_dout - xh[i] * mean_dout_xhat);
      }
    }
  }
  return dx;
}

Tensor Relu::forward(const Tensor& x) {
  x_cache = x;
  return relu_forward(x);
}

Tensor Relu::backward(const Tensor& dout) const { return relu_backward(x_cache, dout); }

Tensor AdaptiveMaxPool::forward(const Tensor& x) {
  x_cache = x;
  return adaptive_maxpool_forward(x, out_h, out_w, &argmax_cache);
}

Tensor AdaptiveMaxPool::backward(const Tensor& dout) const {
  return adaptive_maxpool_backward(x_cache, dout, argmax_cache);
}

Dense::Dense(std::size_t in_f, std::size_t out_f)
    : in_features(in_f),
      out_features(out_f),
      weights({out_f, in_f}),
      bias(out_f, 0.0),
      dweights({out_f, in_f}),
      dbias(out_f, 0.0) {}

void Dense::init(Rng& rng) {
  const double limit = std::sqrt(3.0 / static_cast<double>(in_features));
  for (double& v : weights.data) v = rng.uniform(-limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Dense::forward(const Tensor& x) {
  x_cache = x;
  return dense_forward(x, weights, bias);
}

Tensor Dense::backward(const Tensor& dout) {
  if (x_cache.size() == 0) throw Error("dense backward without a cached forward");
  Tensor dx;
  dense_backward(x_cache, weights, dout, &dx, &dweights, &dbias);
  return dx;
}

Tensor Dropout::forward(const Tensor& x, bool train, Rng* rng) {
  if (!train || rate <= 0.0) {
    mask_cache.assign(x.size(), 1.0);
    return x;
  }
  if (rng == nullptr) throw ConfigError("dropout in training mode needs an RNG");
  if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  mask_cache.resize(x.size());
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_cache[i] = rng->uniform() >= rate ? keep_scale : 0.0;
    out.data[i] = x.data[i] * mask_cache[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& dout) const {
  Tensor dx(dout.shape);
  for (std::size_t i = 0; i < dout.size(); ++i) dx.data[i] = dout.data[i] * mask_cache[i];
  return dx;
}

}  // namespace sff::nn

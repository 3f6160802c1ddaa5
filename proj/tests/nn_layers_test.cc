// tests/nn_layers_test.cc
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

#include <cmath>
#include <functional>

#include "doctest.h"

using namespace sff;
using namespace sff::nn;

namespace {

void fill_uniform(std::vector<double>& v, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (double& x : v) x = rng.uniform(lo, hi);
}

// Central finite differences of a scalar function with respect to one entry.
double fd(const std::function<double()>& f, double* x, double delta = 1e-5) {
  const double orig = *x;
  *x = orig + delta;
  const double up = f();
  *x = orig - delta;
  const double down = f();
  *x = orig;
  return (up - down) / (2.0 * delta);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), 1e-6);
}

// Scalar probe: sum of c[i] * out[i] turns any layer into a scalar function
// whose exact input gradient is the backward pass applied to c.
Tensor random_cotangent(const std::vector<std::size_t>& shape, Rng& rng) {
  Tensor c(shape);
  fill_uniform(c.data, rng);
  return c;
}

double dot(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

}  // namespace

TEST_CASE("1x1 unit kernel is the identity") {
  Tensor x({1, 1, 3, 3});
  for (std::size_t i = 0; i < 9; ++i) x.data[i] = static_cast<double>(i) - 4.0;
  Tensor k({1, 1, 1, 1});
  k.data[0] = 1.0;
  const Tensor y = conv2d_forward(x, k, {0.0});
  CHECK(y.data == x.data);
}

TEST_CASE("2x2 diagonal kernel computes the two-term dot product") {
  Tensor x({1, 1, 2, 2});
  x.data = {1, 2, 3, 4};
  Tensor k({1, 1, 2, 2});
  k.data = {1, 0, 0, 1};
  const Tensor y = conv2d_forward(x, k, {0.0});
  REQUIRE(y.size() == 1);
  CHECK(y.data[0] == 5.0);
}

TEST_CASE("convolution matches the quadruple-loop definition") {
  Rng rng(101);
  Tensor x({2, 2, 6, 6});
  fill_uniform(x.data, rng);
  Tensor k({3, 2, 3, 3});
  fill_uniform(k.data, rng);
  std::vector<double> bias = {0.1, -0.2, 0.3};
  const Tensor y = conv2d_forward(x, k, bias);

  REQUIRE(y.shape == std::vector<std::size_t>{2, 3, 4, 4});
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t o = 0; o < 3; ++o) {
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          double acc = bias[o];
          for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t a = 0; a < 3; ++a) {
              for (std::size_t b = 0; b < 3; ++b) {
                acc += x.data[x.at4(n, c, i + a, j + b)] * k.data[k.at4(o, c, a, b)];
              }
            }
          }
          CHECK(std::abs(y.data[y.at4(n, o, i, j)] - acc) <= 1e-12 * std::max(1.0, std::abs(acc)));
        }
      }
    }
  }
}

TEST_CASE("convolution without bias is linear in the input") {
  Rng rng(7);
  Tensor x1({1, 1, 5, 5}), x2({1, 1, 5, 5});
  fill_uniform(x1.data, rng);
  fill_uniform(x2.data, rng);
  Tensor k({2, 1, 2, 2});
  fill_uniform(k.data, rng);
  const std::vector<double> zero_bias(2, 0.0);

  Tensor mix({1, 1, 5, 5});
  const double a = 2.5, b = -1.25;
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = a * x1.data[i] + b * x2.data[i];

  const Tensor y1 = conv2d_forward(x1, k, zero_bias);
  const Tensor y2 = conv2d_forward(x2, k, zero_bias);
  const Tensor ym = conv2d_forward(mix, k, zero_bias);
  for (std::size_t i = 0; i < ym.size(); ++i) {
    const double expected = a * y1.data[i] + b * y2.data[i];
    CHECK(std::abs(ym.data[i] - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("convolution shape errors") {
  Tensor x({1, 1, 4, 4});
  Tensor k_big({1, 1, 5, 5});
  CHECK_THROWS_AS(conv2d_forward(x, k_big, {0.0}), ShapeError);
  Tensor k_chan({1, 2, 2, 2});
  CHECK_THROWS_AS(conv2d_forward(x, k_chan, {0.0}), ShapeError);
}

TEST_CASE("relu basics and idempotence") {
  Tensor x({1, 3});
  x.data = {-1.0, 0.0, 2.0};
  const Tensor y = relu_forward(x);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.0});
  CHECK(relu_forward(y).data == y.data);

  Tensor neg({2, 2});
  neg.data = {-1, -2, -3, -4};
  for (double v : relu_forward(neg).data) CHECK(v == 0.0);
}

TEST_CASE("batchnorm standardizes per channel in training") {
  Rng rng(23);
  Tensor x({4, 3, 5, 6});
  fill_uniform(x.data, rng, -3.0, 3.0);
  BatchNorm2d bn(3);
  const Tensor y = bn.forward(x, /*train=*/true);

  const std::size_t plane = 5 * 6;
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
      for (std::size_t i = 0; i < plane; ++i) mean += y.data[y.at4(n, c, 0, 0) + i];
    }
    mean /= 4.0 * plane;
    for (std::size_t n = 0; n < 4; ++n) {
      for (std::size_t i = 0; i < plane; ++i) {
        const double d = y.data[y.at4(n, c, 0, 0) + i] - mean;
        var += d * d;
      }
    }
    var /= 4.0 * plane;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-5);
  }
}

TEST_CASE("batchnorm of a constant batch is zero pre-affine") {
  Tensor x({3, 2, 2, 2});
  for (double& v : x.data) v = 1.7;
  BatchNorm2d bn(2);
  const Tensor y = bn.forward(x, true);
  // The epsilon floor keeps 0/sqrt(eps) finite; rounding in the mean leaves
  // residuals of order 1e-13.
  for (double v : y.data) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("batchnorm statistics match a hand computation") {
  Tensor x({2, 1, 1, 3});
  x.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  BatchNorm2d bn(1);
  bn.gamma[0] = 2.0;
  bn.beta[0] = -1.0;
  const Tensor y = bn.forward(x, true);

  const double mean = 3.5;
  const double var = (6.25 + 2.25 + 0.25 + 0.25 + 2.25 + 6.25) / 6.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double expected = 2.0 * (x.data[i] - mean) / std::sqrt(var + 1e-5) - 1.0;
    CHECK(std::abs(y.data[i] - expected) <= 1e-10);
  }
  CHECK(bn.running_mean[0] == doctest::Approx(0.1 * mean));
  CHECK(bn.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * var));
}

TEST_CASE("batchnorm inference uses running statistics") {
  BatchNorm2d bn(1);
  bn.running_mean[0] = 2.0;
  bn.running_var[0] = 4.0;
  Tensor x({1, 1, 1, 2});
  x.data = {2.0, 4.0};
  const Tensor y = bn.forward(x, false);
  CHECK(y.data[0] == doctest::Approx(0.0));
  CHECK(y.data[1] == doctest::Approx(2.0 / std::sqrt(4.0 + 1e-5)));
}

TEST_CASE("batchnorm rejects a training batch of one") {
  BatchNorm2d bn(1);
  Tensor x({1, 1, 2, 2});
  CHECK_THROWS_AS(bn.forward(x, true), DataError);
}

TEST_CASE("adaptive maxpool takes quadrant maxima") {
  Tensor x({1, 1, 4, 4});
  for (std::size_t i = 0; i < 16; ++i) x.data[i] = static_cast<double>(i);
  const Tensor y = adaptive_maxpool_forward(x, 2, 2, nullptr);
  CHECK(y.data == std::vector<double>{5, 7, 13, 15});

  Tensor c({1, 1, 5, 5});
  for (double& v : c.data) v = 3.0;
  for (double v : adaptive_maxpool_forward(c, 2, 3, nullptr).data) CHECK(v == 3.0);
}

TEST_CASE("adaptive maxpool matches a patch-loop oracle") {
  Rng rng(31);
  Tensor x({1, 2, 19, 28});
  fill_uniform(x.data, rng);
  const std::size_t oh = 9, ow = 13;
  const Tensor y = adaptive_maxpool_forward(x, oh, ow, nullptr);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double best = -1e300;
        for (std::size_t yy = i * 19 / oh; yy < (i + 1) * 19 / oh; ++yy) {
          for (std::size_t xx = j * 28 / ow; xx < (j + 1) * 28 / ow; ++xx) {
            best = std::max(best, x.data[x.at4(0, c, yy, xx)]);
          }
        }
        CHECK(y.data[y.at4(0, c, i, j)] == best);
      }
    }
  }
}

TEST_CASE("adaptive maxpool output equals the max of its patch") {
  Rng rng(67);
  Tensor x({2, 1, 12, 17});
  fill_uniform(x.data, rng);
  const Tensor y = adaptive_maxpool_forward(x, 5, 5, nullptr);
  double xmax = -1e300, ymax = -1e300;
  for (double v : x.data) xmax = std::max(xmax, v);
  for (double v : y.data) ymax = std::max(ymax, v);
  CHECK(ymax <= xmax);

  CHECK_THROWS_AS(adaptive_maxpool_forward(x, 0, 5, nullptr), ShapeError);
  CHECK_THROWS_AS(adaptive_maxpool_forward(x, 13, 5, nullptr), ShapeError);
}

TEST_CASE("softmax of uniform logits and the ln(4) loss") {
  Tensor logits({1, 4});
  logits.data = {0.7, 0.7, 0.7, 0.7};
  const Tensor p = softmax_rows(logits);
  for (double v : p.data) CHECK(v == doctest::Approx(0.25));
  const double loss = weighted_cross_entropy(p, {2}, {1, 1, 1, 1}, nullptr);
  CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  CHECK(loss == doctest::Approx(1.386294).epsilon(1e-5));
}

TEST_CASE("softmax is invariant to a constant logit shift") {
  Rng rng(3);
  Tensor a({3, 5});
  fill_uniform(a.data, rng, -2.0, 2.0);
  Tensor b = a;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 5; ++c) b.data[r * 5 + c] += 17.5;
  }
  const Tensor pa = softmax_rows(a), pb = softmax_rows(b);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(std::abs(pa.data[i] - pb.data[i]) <= 1e-12);
  }
}

TEST_CASE("softmax of [2, 1, 0.1]") {
  Tensor logits({1, 3});
  logits.data = {2.0, 1.0, 0.1};
  const Tensor p = softmax_rows(logits);
  CHECK(p.data[0] == doctest::Approx(0.6590).epsilon(1e-3));
  CHECK(p.data[1] == doctest::Approx(0.2424).epsilon(1e-3));
  CHECK(p.data[2] == doctest::Approx(0.0986).epsilon(1e-3));
  CHECK(p.data[0] + p.data[1] + p.data[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conv gradients match finite differences") {
  Rng rng(203);
  Tensor x({2, 2, 5, 6});
  fill_uniform(x.data, rng);
  Tensor k({3, 2, 3, 3});
  fill_uniform(k.data, rng, -0.5, 0.5);
  std::vector<double> bias(3);
  fill_uniform(bias, rng, -0.1, 0.1);
  const Tensor cot = random_cotangent({2, 3, 3, 4}, rng);

  auto loss = [&]() { return dot(conv2d_forward(x, k, bias), cot); };

  Tensor dx, dk;
  std::vector<double> db;
  conv2d_backward(x, k, cot, &dx, &dk, &db);

  for (std::size_t i = 0; i < k.size(); i += 3) {
    CHECK(rel_err(fd(loss, &k.data[i]), dk.data[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < bias.size(); ++i) {
    CHECK(rel_err(fd(loss, &bias[i]), db[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < x.size(); i += 7) {
    CHECK(rel_err(fd(loss, &x.data[i]), dx.data[i]) < 1e-4);
  }
}

TEST_CASE("zero input with zero bias gives zero conv weight gradients") {
  Tensor x({1, 1, 4, 4});  // zeros
  Tensor k({2, 1, 2, 2});
  k.data = {1, 2, 3, 4, 5, 6, 7, 8};
  Tensor dout({1, 2, 3, 3});
  for (double& v : dout.data) v = 1.0;
  Tensor dk;
  conv2d_backward(x, k, dout, nullptr, &dk, nullptr);
  for (double v : dk.data) CHECK(v == 0.0);
}

TEST_CASE("batchnorm gradients match finite differences") {
  Rng rng(307);
  Tensor x({3, 2, 4, 4});
  fill_uniform(x.data, rng, -2.0, 2.0);
  BatchNorm2d bn(2);
  fill_uniform(bn.gamma, rng, 0.5, 1.5);
  fill_uniform(bn.beta, rng, -0.5, 0.5);
  const Tensor cot = random_cotangent({3, 2, 4, 4}, rng);

  auto loss = [&]() {
    BatchNorm2d fresh = bn;  // running stats must not leak across evaluations
    return dot(fresh.forward(x, true), cot);
  };

  bn.forward(x, true);
  const Tensor dx = bn.backward(cot);

  for (std::size_t i = 0; i < bn.gamma.size(); ++i) {
    CHECK(rel_err(fd(loss, &bn.gamma[i]), bn.dgamma[i]) < 1e-4);
    CHECK(rel_err(fd(loss, &bn.beta[i]), bn.dbeta[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < x.size(); i += 5) {
    CHECK(rel_err(fd(loss, &x.data[i]), dx.data[i]) < 1e-4);
  }
}

TEST_CASE("dense gradients match finite differences") {
  Rng rng(401);
  Tensor x({4, 6});
  fill_uniform(x.data, rng);
  Tensor w({3, 6});
  fill_uniform(w.data, rng, -0.7, 0.7);
  std::vector<double> bias(3);
  fill_uniform(bias, rng, -0.2, 0.2);
  const Tensor cot = random_cotangent({4, 3}, rng);

  auto loss = [&]() { return dot(dense_forward(x, w, bias), cot); };

  Tensor dx, dw;
  std::vector<double> db;
  dense_backward(x, w, cot, &dx, &dw, &db);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(rel_err(fd(loss, &w.data[i]), dw.data[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < bias.size(); ++i) {
    CHECK(rel_err(fd(loss, &bias[i]), db[i]) < 1e-4);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(rel_err(fd(loss, &x.data[i]), dx.data[i]) < 1e-4);
  }
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  Rng rng(509);
  Tensor logits({5, 4});
  fill_uniform(logits.data, rng, -2.0, 2.0);
  const std::vector<int> targets = {0, 3, 1, 2, 1};
  const std::vector<double> weights = {1.0, 0.5, 2.0, 1.25};

  auto loss = [&]() {
    return weighted_cross_entropy(softmax_rows(logits), targets, weights, nullptr);
  };

  Tensor dlogits;
  weighted_cross_entropy(softmax_rows(logits), targets, weights, &dlogits);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    CHECK(rel_err(fd(loss, &logits.data[i]), dlogits.data[i]) < 1e-4);
  }
}

TEST_CASE("doubling every class weight doubles the gradient") {
  Rng rng(601);
  Tensor logits({3, 4});
  fill_uniform(logits.data, rng, -1.0, 1.0);
  const std::vector<int> targets = {1, 2, 0};
  const std::vector<double> w1 = {1.0, 0.5, 1.5, 2.0};
  std::vector<double> w2 = w1;
  for (double& w : w2) w *= 2.0;

  Tensor g1, g2;
  const double l1 = weighted_cross_entropy(softmax_rows(logits), targets, w1, &g1);
  const double l2 = weighted_cross_entropy(softmax_rows(logits), targets, w2, &g2);
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(std::abs(g2.data[i] - 2.0 * g1.data[i]) <= 1e-14);
  }
}

TEST_CASE("dropout scales survivors and is identity at inference") {
  Rng rng(701);
  Dropout drop;
  drop.rate = 0.5;
  Tensor x({1, 1000});
  for (double& v : x.data) v = 1.0;

  const Tensor y = drop.forward(x, true, &rng);
  std::size_t kept = 0;
  for (double v : y.data) {
    CHECK((v == 0.0 || v == 2.0));
    if (v != 0.0) ++kept;
  }
  CHECK(kept > 350);
  CHECK(kept < 650);

  const Tensor z = drop.forward(x, false, nullptr);
  CHECK(z.data == x.data);
}

// tests/signal_test.cc
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

#include "sff/signal.h"

#include <cmath>

#include "doctest.h"
#include "sff/rng.h"

using namespace sff;

TEST_CASE("pre-emphasis of an impulse") {
  const SampledSignal s = make_signal({1.0, 0.0, 0.0}, 16000);
  const SampledSignal p = pre_emphasize(s);
  CHECK(p.samples == std::vector<double>{1.0, -1.0, 0.0});
}

TEST_CASE("pre-emphasis annihilates a constant after the first sample") {
  const double c = 0.37;
  const SampledSignal p = pre_emphasize(make_signal({c, c, c, c}, 8000));
  CHECK(p.samples[0] == c);
  for (std::size_t i = 1; i < 4; ++i) CHECK(p.samples[i] == 0.0);
}

TEST_CASE("pre-emphasis differentiates a ramp to a constant") {
  const SampledSignal p = pre_emphasize(make_signal({0.0, 1.0, 2.0, 3.0}, 8000));
  CHECK(p.samples == std::vector<double>{0.0, 1.0, 1.0, 1.0});
}

TEST_CASE("pre-emphasis is linear") {
  Rng rng(7);
  std::vector<double> x(500), y(500), mix(500);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.uniform(-1.0, 1.0);
    y[i] = rng.uniform(-1.0, 1.0);
    mix[i] = a * x[i] + b * y[i];
  }
  const SampledSignal px = pre_emphasize(make_signal(x, 16000));
  const SampledSignal py = pre_emphasize(make_signal(y, 16000));
  const SampledSignal pmix = pre_emphasize(make_signal(mix, 16000));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double expected = a * px.samples[i] + b * py.samples[i];
    CHECK(std::abs(pmix.samples[i] - expected) <=
          1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("segmentation of 7 s at 16 kHz into 3 s pieces") {
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples.assign(7 * 16000, 0.01);
  const auto segs = segment_utterance(s, 3.0, "utt1", 2);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].signal.samples.size() == 48000);
  CHECK(segs[1].signal.samples.size() == 48000);
  CHECK(segs[2].signal.samples.size() == 16000);
  for (const auto& seg : segs) {
    CHECK(seg.parent_id == "utt1");
    CHECK(seg.label == 2);
  }
  CHECK(segs[0].index == 0);
  CHECK(segs[2].index == 2);
}

TEST_CASE("a 2 s utterance yields a single segment") {
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples.assign(2 * 16000, 0.5);
  const auto segs = segment_utterance(s, 3.0);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].signal.samples.size() == 32000);
}

TEST_CASE("an exact 6 s utterance yields two segments with no empty tail") {
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples.assign(6 * 16000, 0.5);
  const auto segs = segment_utterance(s, 3.0);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].signal.samples.size() == 48000);
  CHECK(segs[1].signal.samples.size() == 48000);
}

TEST_CASE("concatenating segments reproduces the utterance bit-exactly") {
  Rng rng(11);
  std::vector<double> x(70001);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const SampledSignal s = make_signal(x, 16000);
  const auto segs = segment_utterance(s, 0.7);
  std::vector<double> glued;
  for (const auto& seg : segs) {
    glued.insert(glued.end(), seg.signal.samples.begin(), seg.signal.samples.end());
  }
  CHECK(glued == x);
}

TEST_CASE("signal validation errors") {
  CHECK_THROWS_AS(make_signal({}, 16000), DataError);
  CHECK_THROWS_AS(make_signal({0.1}, 0), ConfigError);
  CHECK_THROWS_AS(make_signal({0.1, std::nan("")}, 16000), DataError);
  SampledSignal ok = make_signal({0.1, 0.2}, 16000);
  CHECK_THROWS_AS(segment_utterance(ok, 0.0), ConfigError);
  CHECK_THROWS_AS(segment_utterance(ok, -1.0), ConfigError);
}

// tests/zff_test.cc
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

#include "sff/zff.h"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sff/rng.h"
#include "test_util.h"

using namespace sff;

namespace {

// Iterated cumulative summation; one resonator pass is two integrations.
std::vector<double> cumsum_oracle(std::vector<double> x, int integrations) {
  for (int k = 0; k < integrations; ++k) {
    double acc = 0.0;
    for (double& v : x) {
      acc += v;
      v = acc;
    }
  }
  return x;
}

// O(N*M) truncated-window mean subtraction.
std::vector<double> trend_oracle(const std::vector<double>& z, std::size_t m) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t lo = i >= m ? i - m : 0;
    const std::size_t hi = std::min(z.size() - 1, i + m);
    double mean = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) mean += z[j];
    mean /= static_cast<double>(hi - lo + 1);
    out[i] = z[i] - mean;
  }
  return out;
}

}  // namespace

TEST_CASE("one resonator pass double-integrates an impulse") {
  std::vector<double> impulse(8, 0.0);
  impulse[0] = 1.0;
  const auto z = zero_freq_resonate(impulse, 1);
  const std::vector<double> expected = {1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(z == expected);
}

TEST_CASE("zero input stays zero through the resonator") {
  const auto z = zero_freq_resonate(std::vector<double>(64, 0.0), 2);
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("two resonator passes give the binomial(n+3,3) sequence") {
  std::vector<double> impulse(10, 0.0);
  impulse[0] = 1.0;
  const auto z = zero_freq_resonate(impulse, 2);
  const auto expected = cumsum_oracle(impulse, 4);
  CHECK(z == expected);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 4.0);
  CHECK(z[2] == 10.0);
  CHECK(z[3] == 20.0);
}

TEST_CASE("trend removal sends a constant to zero everywhere") {
  const std::vector<double> c(40, 3.25);
  const auto z = remove_trend(c, 5);
  for (double v : z) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("trend removal zeroes a ramp on interior samples") {
  std::vector<double> ramp(60);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 * static_cast<double>(i) - 3.0;
  const std::size_t m = 7;
  const auto z = remove_trend(ramp, m);
  for (std::size_t i = m; i + m < ramp.size(); ++i) {
    CHECK(std::abs(z[i]) <= 1e-10);
  }
}

TEST_CASE("trend removal matches the direct windowed-mean oracle") {
  Rng rng(3);
  std::vector<double> x(400);
  for (double& v : x) v = rng.uniform(-2.0, 2.0);
  const auto fast = remove_trend(x, 13);
  const auto slow = trend_oracle(x, 13);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(fast[i] - slow[i]) <= 1e-10);
  }
}

TEST_CASE("trend removal rejects bad windows") {
  CHECK_THROWS_AS(remove_trend(std::vector<double>(10, 1.0), 0), ConfigError);
  CHECK_THROWS_AS(remove_trend(std::vector<double>(10, 1.0), 5), DataError);
}

TEST_CASE("pitch estimate recovers a 100 Hz impulse train") {
  const int fs = 16000;
  std::vector<double> x(fs, 0.0);
  for (std::size_t i = 0; i < x.size(); i += 160) x[i] = 1.0;
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples = x;
  const std::size_t period = estimate_pitch_period(s);
  CHECK(period >= 158);
  CHECK(period <= 162);
}

TEST_CASE("pitch estimate recovers a 200 Hz sinusoid") {
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples = testutil::sine(200.0, 16000, 0.5);
  const std::size_t period = estimate_pitch_period(s);
  CHECK(period >= 79);
  CHECK(period <= 81);
}

TEST_CASE("white noise falls back to the 10 ms default") {
  Rng rng(17);
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples.resize(16000);
  for (double& v : s.samples) v = rng.uniform(-0.5, 0.5);
  CHECK(estimate_pitch_period(s) == 160);
}

TEST_CASE("pitch estimation needs 100 ms of signal") {
  SampledSignal s;
  s.sample_rate_hz = 16000;
  s.samples.assign(800, 0.1);  // 50 ms
  CHECK_THROWS_AS(estimate_pitch_period(s), DataError);
}

TEST_CASE("crossing picker on a forced sinusoidal z-signal") {
  const int fs = 16000;
  // Half-sample phase offset so no sample sits exactly on zero.
  std::vector<double> z(fs);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = std::sin(2.0 * M_PI * 100.0 * (static_cast<double>(i) + 0.5) / fs);
  }
  const auto crossings = positive_zero_crossings(z, fs);
  REQUIRE(crossings.size() >= 90);
  for (std::size_t i = 1; i < crossings.size(); ++i) {
    CHECK(crossings[i] - crossings[i - 1] == 160);
  }
}

TEST_CASE("an all-negative z-signal has no crossings") {
  const std::vector<double> z(1000, -0.5);
  CHECK(positive_zero_crossings(z, 16000).empty());
}

TEST_CASE("crossings within 1 ms merge to the first") {
  const int fs = 16000;  // merge window = 16 samples
  std::vector<double> z(200, -1.0);
  // Crossings at 50, 58 (within 16 -> dropped), 100 (kept).
  z[50] = 1.0;
  z[51] = -1.0;  // back below zero
  z[58] = 1.0;
  z[59] = -1.0;
  z[100] = 1.0;
  const auto crossings = positive_zero_crossings(z, fs);
  CHECK(crossings == std::vector<std::size_t>{50, 100});
}

TEST_CASE("GCIs land on the excitation instants of a synthetic vowel") {
  const int fs = 16000;
  std::vector<std::size_t> truth;
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples = testutil::synth_vowel(120.0, fs, 1.0, &truth);

  const GciSequence gcis = detect_gci(s);
  REQUIRE(gcis.locations.size() >= 2);

  // Tolerance: 0.25 ms = 4 samples at 16 kHz.
  const std::size_t tol = 4;
  std::size_t matched = 0;
  for (std::size_t t : truth) {
    for (std::size_t d : gcis.locations) {
      if ((d >= t ? d - t : t - d) <= tol) {
        ++matched;
        break;
      }
    }
  }
  CHECK(static_cast<double>(matched) >= 0.95 * static_cast<double>(truth.size()));

  std::vector<double> intervals;
  for (std::size_t i = 1; i < gcis.locations.size(); ++i) {
    intervals.push_back(static_cast<double>(gcis.locations[i] - gcis.locations[i - 1]));
  }
  std::sort(intervals.begin(), intervals.end());
  const double median = intervals[intervals.size() / 2];
  CHECK(median == doctest::Approx(fs / 120.0).epsilon(0.05));
}

TEST_CASE("GCI detection is invariant to positive amplitude scaling") {
  const int fs = 16000;
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples = testutil::synth_vowel(140.0, fs, 0.6, nullptr);

  const auto base = detect_gci(s).locations;
  for (double alpha : {2.0, 0.5, 3.0}) {
    SampledSignal scaled = s;
    for (double& v : scaled.samples) v *= alpha;
    CHECK(detect_gci(scaled).locations == base);
  }
}

TEST_CASE("prepending zeros shifts detections by exactly that many samples") {
  const int fs = 16000;
  const std::size_t shift = 37;
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples = testutil::synth_vowel(110.0, fs, 0.6, nullptr);

  ZffConfig config;
  config.trend_window_mode = ZffConfig::TrendWindow::kFixed;
  config.fixed_window_ms = 12.0;

  const auto base = detect_gci(s, config).locations;
  SampledSignal padded;
  padded.sample_rate_hz = fs;
  padded.samples.assign(shift, 0.0);
  padded.samples.insert(padded.samples.end(), s.samples.begin(), s.samples.end());
  const auto shifted = detect_gci(padded, config).locations;

  // Compare away from the trend window's boundary region.
  const std::size_t margin = 200;
  std::vector<std::size_t> base_interior, shifted_interior;
  for (std::size_t v : base) {
    if (v >= margin) base_interior.push_back(v + shift);
  }
  for (std::size_t v : shifted) {
    if (v >= margin + shift) shifted_interior.push_back(v);
  }
  CHECK(base_interior == shifted_interior);
}

TEST_CASE("detected GCIs are strictly increasing and at least 1 ms apart") {
  const int fs = 16000;
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples = testutil::synth_vowel(220.0, fs, 0.8, nullptr);
  const auto gcis = detect_gci(s).locations;
  REQUIRE(!gcis.empty());
  for (std::size_t i = 1; i < gcis.size(); ++i) {
    CHECK(gcis[i] > gcis[i - 1]);
    CHECK(gcis[i] - gcis[i - 1] >= 16);
  }
  CHECK(gcis.back() < s.samples.size());
}

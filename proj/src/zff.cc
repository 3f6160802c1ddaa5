// sff/zff.cc
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
#include <string>

namespace sff {

namespace {

// Pitch search range and pitch-estimation framing.
constexpr double kMinLagS = 0.002;
constexpr double kMaxLagS = 0.015;
constexpr double kFallbackPeriodS = 0.010;
constexpr double kMinCorrelation = 0.3;
constexpr double kEnergyWindowS = 0.300;
// Trend window as a multiple of the estimated pitch period.
constexpr double kTrendWindowPeriods = 1.5;
// Crossings closer than this are numerical chatter and get merged.
constexpr double kMergeWindowS = 0.001;

}  // namespace

std::vector<double> zero_freq_resonate(const std::vector<double>& pre_emphasized,
                                       int passes) {
  if (passes < 1) throw ConfigError("resonator passes must be >= 1");
  std::vector<double> z = pre_emphasized;
  for (int pass = 0; pass < passes; ++pass) {
    double z1 = 0.0, z2 = 0.0;  // z0[n-1], z0[n-2]
    for (double& v : z) {
      const double cur = 2.0 * z1 - z2 + v;
      z2 = z1;
      z1 = cur;
      v = cur;
    }
  }
  return z;
}

std::vector<double> remove_trend(const std::vector<double>& z0,
                                 std::size_t half_window_m) {
  if (half_window_m == 0) throw ConfigError("trend half-window must be positive");
  const std::size_t n = z0.size();
  if (2 * half_window_m + 1 > n) {
    throw DataError("signal shorter than the trend-removal window");
  }

  // Prefix sums; S[i] = sum of z0[0..i).
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + z0[i];

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_window_m ? i - half_window_m : 0;
    const std::size_t hi = std::min(n - 1, i + half_window_m);
    const double mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    out[i] = z0[i] - mean;
  }
  return out;
}

std::size_t estimate_pitch_period(const SampledSignal& signal) {
  validate(signal);
  const int fs = signal.sample_rate_hz;
  const auto n = signal.samples.size();
  if (signal.duration_s() < 0.1) {
    throw DataError("pitch estimation needs at least 100 ms of signal");
  }

  // Pick the highest-energy window as the analysis region.
  const auto win = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(kEnergyWindowS * fs)));
  const std::size_t hop = std::max<std::size_t>(1, win / 2);
  std::size_t best_start = 0;
  double best_energy = -1.0;
  for (std::size_t start = 0; start + win <= n; start += hop) {
    double e = 0.0;
    for (std::size_t i = start; i < start + win; ++i) {
      e += signal.samples[i] * signal.samples[i];
    }
    if (e > best_energy) {
      best_energy = e;
      best_start = start;
    }
  }
  const double* x = signal.samples.data() + best_start;
  const std::size_t w = win;

  const auto lag_min = static_cast<std::size_t>(std::llround(kMinLagS * fs));
  auto lag_max = static_cast<std::size_t>(std::llround(kMaxLagS * fs));
  const auto fallback = static_cast<std::size_t>(std::llround(kFallbackPeriodS * fs));
  if (lag_max + 16 >= w) lag_max = w > 17 ? w - 17 : lag_min;
  if (lag_max <= lag_min) return fallback;

  // Normalized cross-correlation per lag.
  std::vector<double> corr(lag_max + 1, 0.0);
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    double num = 0.0, e0 = 0.0, e1 = 0.0;
    const std::size_t m = w - lag;
    for (std::size_t i = 0; i < m; ++i) {
      num += x[i] * x[i + lag];
      e0 += x[i] * x[i];
      e1 += x[i + lag] * x[i + lag];
    }
    const double denom = std::sqrt(e0 * e1);
    corr[lag] = denom > 0.0 ? num / denom : 0.0;
  }

  double peak = 0.0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) peak = std::max(peak, corr[lag]);
  if (peak < kMinCorrelation) return fallback;

  // First lag near the peak, walked up to its local maximum. Taking the
  // earliest strong lag avoids locking onto period multiples.
  const double threshold = 0.99 * peak;
  std::size_t lag = lag_min;
  while (lag <= lag_max && corr[lag] < threshold) ++lag;
  while (lag + 1 <= lag_max && corr[lag + 1] > corr[lag]) ++lag;
  return lag;
}

std::vector<std::size_t> positive_zero_crossings(const std::vector<double>& z,
                                                 int sample_rate_hz) {
  if (sample_rate_hz <= 0) throw ConfigError("sample rate must be positive");
  const auto merge_window = static_cast<std::size_t>(
      std::llround(kMergeWindowS * sample_rate_hz));
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i - 1] < 0.0 && z[i] >= 0.0) {
      if (!out.empty() && i - out.back() < merge_window) continue;
      out.push_back(i);
    }
  }
  return out;
}

namespace {

std::size_t trend_half_window(const SampledSignal& signal, const ZffConfig& config) {
  const int fs = signal.sample_rate_hz;
  if (config.trend_window_mode == ZffConfig::TrendWindow::kFixed) {
    if (config.fixed_window_ms < 2.0 || config.fixed_window_ms > 50.0) {
      throw ConfigError("fixed trend window must lie in [2, 50] ms");
    }
    const double window_samples = config.fixed_window_ms * 1e-3 * fs;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_samples / 2.0)));
  }
  const std::size_t period = estimate_pitch_period(signal);
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(kTrendWindowPeriods * period / 2.0)));
}

}  // namespace

std::vector<double> zff_signal(const SampledSignal& signal, const ZffConfig& config) {
  validate(signal);
  if (config.trend_passes < 1) throw ConfigError("trend passes must be >= 1");
  const std::size_t half_window = trend_half_window(signal, config);
  const SampledSignal p = pre_emphasize(signal);
  std::vector<double> z = zero_freq_resonate(p.samples, config.resonator_passes);
  for (int pass = 0; pass < config.trend_passes; ++pass) {
    z = remove_trend(z, half_window);
  }
  return z;
}

GciSequence detect_gci(const SampledSignal& signal, const ZffConfig& config) {
  const std::vector<double> z = zff_signal(signal, config);
  GciSequence gcis;
  gcis.sample_rate_hz = signal.sample_rate_hz;
  gcis.locations = positive_zero_crossings(z, signal.sample_rate_hz);
  return gcis;
}

}  // namespace sff

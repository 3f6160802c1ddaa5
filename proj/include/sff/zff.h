// sff/zff.h
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
// Zero frequency filtering: the pre-emphasized signal is passed through a
// resonator with a double pole at 0 Hz, the polynomial trend of the output is
// removed with a pitch-period moving average, and the positive zero crossings
// of the result mark glottal closure instants.

#pragma once

#include <cstddef>
#include <vector>

#include "sff/signal.h"

namespace sff {

struct ZffConfig {
  enum class TrendWindow { kAutoPitch, kFixed };

  TrendWindow trend_window_mode = TrendWindow::kAutoPitch;
  // Window length used when mode is kFixed; must lie in [2, 50] ms.
  double fixed_window_ms = 10.0;
  int trend_passes = 2;
  // One resonator pass leaves formant-rate ripple in the filtered signal and
  // the crossing picker fires several times per pitch cycle; the customary
  // two-pass cascade is the default. Set to 1 for the single-pass variant.
  int resonator_passes = 2;
};

// Strictly increasing sample indices of detected glottal closure instants.
struct GciSequence {
  std::vector<std::size_t> locations;
  int sample_rate_hz = 0;
};

// Cascaded zero-frequency resonator z0[n] = 2 z0[n-1] - z0[n-2] + p[n] with
// zero initial state, applied `passes` times. The output grows polynomially
// with n; accumulation is double precision.
std::vector<double> zero_freq_resonate(const std::vector<double>& pre_emphasized,
                                       int passes);

// z[n] = z0[n] - mean(z0[n-M .. n+M]); the first and last M samples use the
// truncated window so output length equals input length.
std::vector<double> remove_trend(const std::vector<double>& z0,
                                 std::size_t half_window_m);

// Average pitch period in samples, from the normalized autocorrelation of the
// highest-energy region. Searches lags in [2, 15] ms and falls back to 10 ms
// when the correlation peak is below 0.3. Requires at least 100 ms of signal.
std::size_t estimate_pitch_period(const SampledSignal& signal);

// Indices n >= 1 with z[n-1] < 0 and z[n] >= 0. Crossings closer together
// than 1 ms are merged, keeping the first.
std::vector<std::size_t> positive_zero_crossings(const std::vector<double>& z,
                                                 int sample_rate_hz);

// Full pipeline: pre-emphasis, resonator, trend removal (trend_passes times,
// window from the pitch estimate or the fixed setting), crossing pick.
GciSequence detect_gci(const SampledSignal& signal, const ZffConfig& config = {});

// The trend-removed ZFF signal the crossing picker sees; exposed for
// rendering and inspection.
std::vector<double> zff_signal(const SampledSignal& signal,
                               const ZffConfig& config = {});

}  // namespace sff

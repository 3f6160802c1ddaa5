// sff/filterbank.cc
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

#include "sff/filterbank.h"

#include <cmath>
#include <string>

namespace sff {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FilterBank make_filterbank(int sample_rate_hz, double band_lo_hz,
                           double band_hi_hz, double spacing_hz,
                           double pole_radius) {
  if (sample_rate_hz <= 0) {
    throw ConfigError("sample rate must be positive");
  }
  const double nyquist = sample_rate_hz / 2.0;
  if (!(band_lo_hz >= 0.0) || !(band_lo_hz < band_hi_hz) || !(band_hi_hz <= nyquist)) {
    throw ConfigError("analysis band must satisfy 0 <= lo < hi <= fs/2");
  }
  if (!(spacing_hz > 0.0)) {
    throw ConfigError("bin spacing must be positive");
  }
  if (!(pole_radius > 0.0 && pole_radius < 1.0)) {
    throw ConfigError("pole radius " + std::to_string(pole_radius) +
                      " is outside (0, 1); the filter would be unstable");
  }
  const double bins = (band_hi_hz - band_lo_hz) / spacing_hz;
  const auto k = static_cast<std::size_t>(std::llround(bins));
  if (k == 0 || std::abs(bins - static_cast<double>(k)) > 1e-9) {
    throw ConfigError("band width is not an integer multiple of the spacing");
  }

  FilterBank bank;
  bank.sample_rate_hz = sample_rate_hz;
  bank.spacing_hz = spacing_hz;
  bank.band_lo_hz = band_lo_hz;
  bank.band_hi_hz = band_hi_hz;
  bank.pole_radius = pole_radius;
  bank.bin_freqs_hz.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    bank.bin_freqs_hz[i] = band_lo_hz + spacing_hz * static_cast<double>(i + 1);
  }
  return bank;
}

SffEnvelope sff_envelope(const SampledSignal& pre_emphasized,
                         const FilterBank& bank) {
  validate(pre_emphasized);
  if (pre_emphasized.sample_rate_hz != bank.sample_rate_hz) {
    throw ConfigError("signal rate " + std::to_string(pre_emphasized.sample_rate_hz) +
                      " does not match filterbank rate " +
                      std::to_string(bank.sample_rate_hz));
  }

  const std::size_t num_bins = bank.num_bins();
  const std::size_t n_samples = pre_emphasized.samples.size();
  const double r = bank.pole_radius;
  const double fs = bank.sample_rate_hz;
  const double* p = pre_emphasized.samples.data();

  SffEnvelope env;
  env.filterbank = bank;
  env.n_samples = n_samples;
  env.values = Matrix(num_bins, n_samples);

  for (std::size_t k = 0; k < num_bins; ++k) {
    // Shifted frequency f_s/2 - f_k, normalized.
    const double omega = kTwoPi * (fs / 2.0 - bank.bin_freqs_hz[k]) / fs;
    const double step_re = std::cos(omega);
    const double step_im = std::sin(omega);
    // Phasor e^{j omega n}, advanced multiplicatively. The unit-magnitude
    // drift over a 12 s utterance stays far below the envelope tolerances.
    double rot_re = 1.0, rot_im = 0.0;
    double y_re = 0.0, y_im = 0.0;
    double* row = env.values.row(k);
    for (std::size_t n = 0; n < n_samples; ++n) {
      y_re = -r * y_re + p[n] * rot_re;
      y_im = -r * y_im + p[n] * rot_im;
      row[n] = std::sqrt(y_re * y_re + y_im * y_im);
      const double next_re = rot_re * step_re - rot_im * step_im;
      const double next_im = rot_re * step_im + rot_im * step_re;
      rot_re = next_re;
      rot_im = next_im;
    }
  }
  return env;
}

}  // namespace sff

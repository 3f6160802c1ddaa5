// sff/filterbank.h
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
// Single frequency filtering: each analysis frequency f_k is heterodyned to
// f_s/2 by a complex sinusoid at the shifted frequency f_s/2 - f_k and passed
// through a one-pole filter H(z) = 1/(1 + r z^-1) whose pole sits near the
// unit circle. The magnitude of the filter state is the amplitude envelope of
// the signal at f_k, sample by sample, so time and frequency resolution are
// obtained simultaneously.

#pragma once

#include <cstddef>
#include <vector>

#include "sff/matrix.h"
#include "sff/signal.h"

namespace sff {

// Parametric bank of single-frequency filters. Bin k analyzes
// band_lo_hz + (k+1) * spacing_hz: the bank starts one spacing above band_lo,
// so K = (band_hi - band_lo) / spacing and a 0 Hz bin (where pre-emphasis
// leaves no signal) never appears.
struct FilterBank {
  int sample_rate_hz = 0;
  double spacing_hz = 0.0;
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  double pole_radius = 0.0;
  std::vector<double> bin_freqs_hz;

  std::size_t num_bins() const { return bin_freqs_hz.size(); }
};

constexpr double kDefaultPoleRadius = 0.9394;
constexpr double kDefaultSpacingHz = 20.0;

// Validates the band/spacing/radius and enumerates the bin frequencies.
// (band_hi - band_lo) must be an integer multiple of spacing, the band must
// fit inside [0, fs/2], and the pole radius must lie strictly inside (0, 1).
FilterBank make_filterbank(int sample_rate_hz, double band_lo_hz,
                           double band_hi_hz, double spacing_hz,
                           double pole_radius = kDefaultPoleRadius);

// K x N nonnegative amplitude envelope, one row per bin, one column per
// input sample.
struct SffEnvelope {
  Matrix values;
  FilterBank filterbank;
  std::size_t n_samples = 0;
};

// Runs the complex one-pole recursion y[k,n] = -r y[k,n-1] + p[n] e^{jw_k n}
// per bin with y[k,-1] = 0 and emits e[k,n] = |y[k,n]|. Expects the
// pre-emphasized signal; the signal and bank sample rates must agree.
// Accumulation is in double precision throughout.
SffEnvelope sff_envelope(const SampledSignal& pre_emphasized,
                         const FilterBank& bank);

}  // namespace sff

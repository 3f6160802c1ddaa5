// sff/extract.h
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
// End-to-end feature extraction for one segment, and the corpus scan that
// sizes the fixed feature width.

#pragma once

#include <optional>

#include "sff/filterbank.h"
#include "sff/manifest.h"
#include "sff/spectrogram.h"
#include "sff/signal.h"
#include "sff/zff.h"

namespace sff {

struct ExtractConfig {
  double seg_seconds = 3.0;
  double band_lo_hz = 0.0;
  double band_hi_hz = 4000.0;
  double spacing_hz = kDefaultSpacingHz;
  double pole_radius = kDefaultPoleRadius;
  ZffConfig zff;
  StftConfig stft;
  double fixed_frame_ms = 20.0;
  double fixed_overlap_fraction = 0.5;
  std::size_t pad_width = 1077;
  double log_floor = kDefaultLogFloor;
  bool inclusive_gci_sum = false;
  std::optional<int> channel;
};

// Envelope -> subsample -> log -> pad for one segment signal. A segment with
// fewer than 2 detected GCIs (silence) degrades to a single column holding
// the whole-segment envelope mean instead of failing.
FeatureMatrix extract_segment(const SampledSignal& segment, SpectrogramKind kind,
                              const ExtractConfig& config);

// Several kinds from one segment; the SFF envelope is computed once and
// shared between the pitch-synchronous and fixed-frame representations.
std::vector<FeatureMatrix> extract_segment_kinds(
    const SampledSignal& segment, const std::vector<SpectrogramKind>& kinds,
    const ExtractConfig& config);

// Largest pitch-synchronous column count over every segment of every
// manifest entry; sizes the pad width. Returns 0 for an empty manifest.
std::size_t scan_max_gci(const Manifest& manifest, const ExtractConfig& config);

}  // namespace sff

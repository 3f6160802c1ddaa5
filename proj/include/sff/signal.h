// sff/signal.h
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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sff/error.h"

namespace sff {

// Mono audio held as doubles normalized to [-1, 1]. All operations in the
// toolkit treat values as immutable once constructed.
struct SampledSignal {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Throws DataError on empty/non-finite samples, ConfigError on a bad rate.
void validate(const SampledSignal& signal);

// Validating constructor-equivalent used by tests and file readers.
SampledSignal make_signal(std::vector<double> samples, int sample_rate_hz);

// First difference p[n] = s[n] - s[n-1] with s[-1] = 0, so p[0] = s[0].
// Removes low-frequency bias and boosts high frequencies; length preserved.
SampledSignal pre_emphasize(const SampledSignal& signal);

// A fixed-duration slice of a parent utterance. Every segment except the
// last has exactly the nominal duration; the last keeps the remainder.
struct Segment {
  std::string parent_id;
  int index = 0;
  SampledSignal signal;
  std::optional<int> label;
};

// Splits an utterance into consecutive non-overlapping seg_seconds chunks.
// The tail remainder is kept as a shorter final segment; every segment
// inherits the utterance label.
std::vector<Segment> segment_utterance(const SampledSignal& signal,
                                       double seg_seconds,
                                       const std::string& parent_id = "",
                                       std::optional<int> label = std::nullopt);

}  // namespace sff

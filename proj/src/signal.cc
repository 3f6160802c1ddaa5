// sff/signal.cc
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

#include <algorithm>
#include <cmath>
#include <utility>

namespace sff {

void validate(const SampledSignal& signal) {
  if (signal.sample_rate_hz <= 0) {
    throw ConfigError("sample rate must be positive, got " +
                      std::to_string(signal.sample_rate_hz));
  }
  if (signal.samples.empty()) {
    throw DataError("signal has no samples");
  }
  for (double v : signal.samples) {
    if (!std::isfinite(v)) {
      throw DataError("signal contains a non-finite sample");
    }
  }
}

SampledSignal make_signal(std::vector<double> samples, int sample_rate_hz) {
  SampledSignal s{std::move(samples), sample_rate_hz};
  validate(s);
  return s;
}

SampledSignal pre_emphasize(const SampledSignal& signal) {
  validate(signal);
  SampledSignal out;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.samples.resize(signal.samples.size());
  out.samples[0] = signal.samples[0];
  for (std::size_t n = 1; n < signal.samples.size(); ++n) {
    out.samples[n] = signal.samples[n] - signal.samples[n - 1];
  }
  return out;
}

std::vector<Segment> segment_utterance(const SampledSignal& signal,
                                       double seg_seconds,
                                       const std::string& parent_id,
                                       std::optional<int> label) {
  validate(signal);
  if (!(seg_seconds > 0.0)) {
    throw ConfigError("segment duration must be positive");
  }
  const auto seg_len =
      static_cast<std::size_t>(std::llround(seg_seconds * signal.sample_rate_hz));
  if (seg_len == 0) {
    throw ConfigError("segment duration is below one sample");
  }

  std::vector<Segment> segments;
  const std::size_t total = signal.samples.size();
  for (std::size_t start = 0, index = 0; start < total; start += seg_len, ++index) {
    const std::size_t len = std::min(seg_len, total - start);
    Segment seg;
    seg.parent_id = parent_id;
    seg.index = static_cast<int>(index);
    seg.label = label;
    seg.signal.sample_rate_hz = signal.sample_rate_hz;
    seg.signal.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                              signal.samples.begin() + static_cast<std::ptrdiff_t>(start + len));
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace sff

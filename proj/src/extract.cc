// sff/extract.cc
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

#include "sff/extract.h"

#include <algorithm>

#include "sff/wav.h"

namespace sff {

namespace {

// Whole-segment envelope mean as a single column; the representable stand-in
// for segments where no pitch cycles were found.
Spectrogram whole_segment_mean(const SffEnvelope& env) {
  const std::size_t bins = env.values.rows();
  const std::size_t n = env.n_samples;
  Spectrogram s;
  s.kind = SpectrogramKind::kPitchSyncSff;
  s.bin_freqs_hz = env.filterbank.bin_freqs_hz;
  s.values = Matrix(bins, 1);
  s.column_times_s.assign(1, n / (2.0 * env.filterbank.sample_rate_hz));
  for (std::size_t k = 0; k < bins; ++k) {
    const double* row = env.values.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += row[i];
    s.values(k, 0) = acc / static_cast<double>(n);
  }
  return s;
}

}  // namespace

namespace {

FeatureMatrix extract_with_envelope(const SampledSignal& segment,
                                    const SffEnvelope& env, SpectrogramKind kind,
                                    const ExtractConfig& config) {
  Spectrogram s;
  if (kind == SpectrogramKind::kSffFixedFrame) {
    s = fixed_frame_subsample(env, config.fixed_frame_ms, config.fixed_overlap_fraction);
  } else {
    GciSequence gcis;
    try {
      gcis = detect_gci(segment, config.zff);
    } catch (const DataError&) {
      gcis.sample_rate_hz = segment.sample_rate_hz;  // silence or too short
    }
    if (gcis.locations.size() < 2) {
      s = whole_segment_mean(env);
    } else {
      s = pitch_sync_subsample(env, gcis, config.inclusive_gci_sum);
    }
  }
  return pad_to_width(log_compress(std::move(s), config.log_floor), config.pad_width);
}

FeatureMatrix extract_stft(const SampledSignal& segment, const ExtractConfig& config) {
  StftConfig stft = config.stft;
  stft.band_lo_hz = config.band_lo_hz;
  stft.band_hi_hz = config.band_hi_hz;
  Spectrogram s = stft_spectrogram(segment, stft);
  return pad_to_width(log_compress(std::move(s), config.log_floor), config.pad_width);
}

SffEnvelope make_envelope(const SampledSignal& segment, const ExtractConfig& config) {
  const FilterBank bank =
      make_filterbank(segment.sample_rate_hz, config.band_lo_hz, config.band_hi_hz,
                      config.spacing_hz, config.pole_radius);
  return sff_envelope(pre_emphasize(segment), bank);
}

}  // namespace

FeatureMatrix extract_segment(const SampledSignal& segment, SpectrogramKind kind,
                              const ExtractConfig& config) {
  if (kind == SpectrogramKind::kStft) return extract_stft(segment, config);
  return extract_with_envelope(segment, make_envelope(segment, config), kind, config);
}

std::vector<FeatureMatrix> extract_segment_kinds(
    const SampledSignal& segment, const std::vector<SpectrogramKind>& kinds,
    const ExtractConfig& config) {
  bool needs_envelope = false;
  for (SpectrogramKind kind : kinds) {
    if (kind != SpectrogramKind::kStft) needs_envelope = true;
  }
  SffEnvelope env;
  if (needs_envelope) env = make_envelope(segment, config);

  std::vector<FeatureMatrix> out;
  out.reserve(kinds.size());
  for (SpectrogramKind kind : kinds) {
    if (kind == SpectrogramKind::kStft) {
      out.push_back(extract_stft(segment, config));
    } else {
      out.push_back(extract_with_envelope(segment, env, kind, config));
    }
  }
  return out;
}

std::size_t scan_max_gci(const Manifest& manifest, const ExtractConfig& config) {
  std::size_t max_cols = 0;
  for (const ManifestEntry& entry : manifest.entries) {
    const SampledSignal signal = load_wav(entry.path, config.channel);
    for (const Segment& seg : segment_utterance(signal, config.seg_seconds, entry.id)) {
      std::size_t cols = 1;
      try {
        const GciSequence gcis = detect_gci(seg.signal, config.zff);
        if (gcis.locations.size() >= 2) cols = gcis.locations.size() - 1;
      } catch (const DataError&) {
        cols = 1;
      }
      max_cols = std::max(max_cols, cols);
    }
  }
  return max_cols;
}

}  // namespace sff

// sff/spectrogram.h
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
// The three competing time-frequency representations: pitch-synchronous SFF
// (per-pitch-cycle envelope means), fixed-frame SFF, and the STFT baseline.
// Processing order is fixed: envelope -> subsample -> log -> pad.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sff/filterbank.h"
#include "sff/matrix.h"
#include "sff/signal.h"
#include "sff/zff.h"

namespace sff {

enum class SpectrogramKind : std::uint8_t {
  kPitchSyncSff = 0,
  kSffFixedFrame = 1,
  kStft = 2,
};

const char* to_string(SpectrogramKind kind);
SpectrogramKind spectrogram_kind_from_string(const std::string& name);

// A spectrogram under construction: K x L values plus per-row frequencies
// and per-column time stamps (pitch-cycle midpoints or frame centers).
struct Spectrogram {
  Matrix values;
  SpectrogramKind kind = SpectrogramKind::kPitchSyncSff;
  std::vector<double> bin_freqs_hz;
  std::vector<double> column_times_s;
};

// Fixed-width CNN input after log compression and zero padding. Padded
// entries are exactly zero and sit at the right edge.
struct FeatureMatrix {
  Matrix values;
  SpectrogramKind kind = SpectrogramKind::kPitchSyncSff;
  std::vector<double> bin_freqs_hz;
  std::vector<double> column_times_s;
  std::uint32_t pad_columns = 0;
};

// Per-bin mean of the envelope over each half-open interval [s[l], s[l+1])
// between successive GCIs; the l-th column's time stamp is the interval
// midpoint. Samples before the first and after the last GCI are discarded.
// With inclusive_sum the literal textbook form is reproduced instead: an
// inclusive sample sum divided by the interval length s[l+1] - s[l].
// Fewer than 2 GCIs raises DataError.
Spectrogram pitch_sync_subsample(const SffEnvelope& env, const GciSequence& gcis,
                                 bool inclusive_sum = false);

// Per-bin mean over fixed frames of frame_ms with hop frame_ms * (1 -
// overlap_fraction); a partial tail frame is averaged over its actual length.
// A frame longer than the signal degenerates to a single whole-signal column.
Spectrogram fixed_frame_subsample(const SffEnvelope& env, double frame_ms,
                                  double overlap_fraction);

struct StftConfig {
  double frame_ms = 40.0;
  double hop_ms = 10.0;
  std::size_t dft_length = 800;
  double band_lo_hz = 0.0;
  double band_hi_hz = 4000.0;
};

// Magnitude STFT: per frame a periodic Hamming window, zero padding to
// dft_length, and the DFT magnitude at the bins inside (band_lo, band_hi].
// The DC bin is excluded so rows line up with an SFF bank over the same band.
Spectrogram stft_spectrogram(const SampledSignal& signal, const StftConfig& config);

constexpr double kDefaultLogFloor = 1e-10;

// x = ln(max(u, floor)) per entry. Negative entries raise DataError.
Matrix log_compress(const Matrix& m, double floor = kDefaultLogFloor);
Spectrogram log_compress(Spectrogram s, double floor = kDefaultLogFloor);

// Right-pads with zero columns to exactly `width` (pad column times are 0);
// wider inputs are truncated from the right with a warning on stderr.
FeatureMatrix pad_to_width(const Spectrogram& s, std::size_t width);

// FeatureMatrix container: magic "SFFM", version u16, kind u8, K u32, W u32,
// pad_columns u32, K*W little-endian doubles row-major, K bin frequencies,
// W column times. Round trips are bit exact.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm);
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm);
FeatureMatrix read_feature_matrix(std::istream& in);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

// One CSV row per frequency bin, low bin first.
void write_feature_csv(std::ostream& out, const FeatureMatrix& fm);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm);

// 8-bit binary PGM, min-max scaled over the non-padded region, frequency on
// the vertical axis with low frequencies at the bottom.
void write_feature_pgm(std::ostream& out, const FeatureMatrix& fm);
void write_feature_pgm(const std::filesystem::path& path, const FeatureMatrix& fm);

}  // namespace sff

// sff/spectrogram.cc
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

#include "sff/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <type_traits>
#include <utility>

namespace sff {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void require(bool ok, const char* what) {
  if (!ok) throw FormatError(what);
}
}  // namespace

const char* to_string(SpectrogramKind kind) {
  switch (kind) {
    case SpectrogramKind::kPitchSyncSff: return "pitch_sync_sff";
    case SpectrogramKind::kSffFixedFrame: return "sff_fixed_frame";
    case SpectrogramKind::kStft: return "stft";
  }
  throw ConfigError("unknown spectrogram kind");
}

SpectrogramKind spectrogram_kind_from_string(const std::string& name) {
  if (name == "pitch_sync_sff") return SpectrogramKind::kPitchSyncSff;
  if (name == "sff_fixed_frame") return SpectrogramKind::kSffFixedFrame;
  if (name == "stft") return SpectrogramKind::kStft;
  throw ConfigError("unknown spectrogram kind '" + name + "'");
}

Spectrogram pitch_sync_subsample(const SffEnvelope& env, const GciSequence& gcis,
                                 bool inclusive_sum) {
  const std::size_t n_gcis = gcis.locations.size();
  if (n_gcis < 2) {
    throw DataError("pitch-synchronous subsampling needs at least 2 GCIs, got " +
                    std::to_string(n_gcis));
  }
  for (std::size_t l = 0; l + 1 < n_gcis; ++l) {
    if (gcis.locations[l + 1] <= gcis.locations[l]) {
      throw DataError("GCI locations must be strictly increasing");
    }
  }
  if (gcis.locations.back() >= env.n_samples) {
    throw DataError("GCI location beyond the envelope length");
  }

  const std::size_t num_bins = env.values.rows();
  const std::size_t cols = n_gcis - 1;
  Spectrogram out;
  out.kind = SpectrogramKind::kPitchSyncSff;
  out.bin_freqs_hz = env.filterbank.bin_freqs_hz;
  out.values = Matrix(num_bins, cols);
  out.column_times_s.resize(cols);

  const double fs = gcis.sample_rate_hz > 0 ? gcis.sample_rate_hz
                                            : env.filterbank.sample_rate_hz;
  for (std::size_t l = 0; l < cols; ++l) {
    const std::size_t lo = gcis.locations[l];
    const std::size_t hi = gcis.locations[l + 1];
    out.column_times_s[l] = (static_cast<double>(lo) + static_cast<double>(hi)) / (2.0 * fs);
    // Half-open [lo, hi) divided by the sample count; the literal inclusive
    // form sums [lo, hi] but keeps the divisor hi - lo.
    const std::size_t end = inclusive_sum ? hi + 1 : hi;
    const double divisor = static_cast<double>(hi - lo);
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double* row = env.values.row(k);
      double acc = 0.0;
      for (std::size_t i = lo; i < end; ++i) acc += row[i];
      out.values(k, l) = acc / divisor;
    }
  }
  return out;
}

Spectrogram fixed_frame_subsample(const SffEnvelope& env, double frame_ms,
                                  double overlap_fraction) {
  if (!(frame_ms > 0.0)) throw ConfigError("frame length must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("overlap fraction must lie in [0, 1)");
  }
  const double fs = env.filterbank.sample_rate_hz;
  const std::size_t n = env.n_samples;
  auto frame_len = static_cast<std::size_t>(std::llround(frame_ms * 1e-3 * fs));
  frame_len = std::max<std::size_t>(1, frame_len);
  auto hop = static_cast<std::size_t>(
      std::llround(frame_ms * (1.0 - overlap_fraction) * 1e-3 * fs));
  hop = std::max<std::size_t>(1, hop);

  // Frame starts; a frame longer than the signal degenerates to one
  // whole-signal column rather than an error.
  std::vector<std::pair<std::size_t, std::size_t>> frames;  // (start, len)
  if (frame_len >= n) {
    frames.emplace_back(0, n);
  } else {
    for (std::size_t start = 0; start < n; start += hop) {
      const std::size_t len = std::min(frame_len, n - start);
      frames.emplace_back(start, len);
      if (start + frame_len >= n) break;  // the partial tail is the last frame
    }
  }

  const std::size_t num_bins = env.values.rows();
  Spectrogram out;
  out.kind = SpectrogramKind::kSffFixedFrame;
  out.bin_freqs_hz = env.filterbank.bin_freqs_hz;
  out.values = Matrix(num_bins, frames.size());
  out.column_times_s.resize(frames.size());

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto [start, len] = frames[f];
    out.column_times_s[f] = (start + len / 2.0) / fs;
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double* row = env.values.row(k);
      double acc = 0.0;
      for (std::size_t i = start; i < start + len; ++i) acc += row[i];
      out.values(k, f) = acc / static_cast<double>(len);
    }
  }
  return out;
}

Spectrogram stft_spectrogram(const SampledSignal& signal, const StftConfig& config) {
  validate(signal);
  if (!(config.hop_ms > 0.0)) throw ConfigError("STFT hop must be positive");
  if (!(config.frame_ms > 0.0)) throw ConfigError("STFT frame must be positive");
  const double fs = signal.sample_rate_hz;
  const std::size_t n = signal.samples.size();
  auto frame_len = static_cast<std::size_t>(std::llround(config.frame_ms * 1e-3 * fs));
  frame_len = std::max<std::size_t>(1, frame_len);
  auto hop = static_cast<std::size_t>(std::llround(config.hop_ms * 1e-3 * fs));
  hop = std::max<std::size_t>(1, hop);
  if (config.dft_length < frame_len) {
    throw ConfigError("DFT length " + std::to_string(config.dft_length) +
                      " shorter than the frame (" + std::to_string(frame_len) +
                      " samples)");
  }

  // Periodic Hamming; the periodic form makes a tone at a DFT bin land on a
  // window-spectrum zero, which the exact-bin identities rely on.
  std::vector<double> window(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(i) /
                                       static_cast<double>(frame_len));
  }

  // Kept bins: inside (band_lo, band_hi], matching the SFF bank convention.
  const double bin_hz = fs / static_cast<double>(config.dft_length);
  std::vector<std::size_t> kept;
  std::vector<double> kept_freqs;
  for (std::size_t b = 0; b <= config.dft_length / 2; ++b) {
    const double f = b * bin_hz;
    if (f > config.band_lo_hz && f <= config.band_hi_hz + 1e-9) {
      kept.push_back(b);
      kept_freqs.push_back(f);
    }
  }
  if (kept.empty()) throw ConfigError("no DFT bins inside the analysis band");

  std::vector<std::pair<std::size_t, std::size_t>> frames;
  if (frame_len >= n) {
    frames.emplace_back(0, n);
  } else {
    for (std::size_t start = 0; start < n; start += hop) {
      frames.emplace_back(start, std::min(frame_len, n - start));
      if (start + frame_len >= n) break;
    }
  }

  Spectrogram out;
  out.kind = SpectrogramKind::kStft;
  out.bin_freqs_hz = kept_freqs;
  out.values = Matrix(kept.size(), frames.size());
  out.column_times_s.resize(frames.size());

  // Precompute the DFT twiddles for the kept bins.
  std::vector<double> windowed(frame_len);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto [start, len] = frames[f];
    out.column_times_s[f] = (start + frame_len / 2.0) / fs;
    for (std::size_t i = 0; i < frame_len; ++i) {
      const double x = i < len ? signal.samples[start + i] : 0.0;
      windowed[i] = x * window[i];
    }
    for (std::size_t kb = 0; kb < kept.size(); ++kb) {
      const double omega = -kTwoPi * static_cast<double>(kept[kb]) /
                           static_cast<double>(config.dft_length);
      const double step_re = std::cos(omega);
      const double step_im = std::sin(omega);
      double rot_re = 1.0, rot_im = 0.0;
      double acc_re = 0.0, acc_im = 0.0;
      for (std::size_t i = 0; i < frame_len; ++i) {
        acc_re += windowed[i] * rot_re;
        acc_im += windowed[i] * rot_im;
        const double next_re = rot_re * step_re - rot_im * step_im;
        const double next_im = rot_re * step_im + rot_im * step_re;
        rot_re = next_re;
        rot_im = next_im;
      }
      out.values(kb, f) = std::sqrt(acc_re * acc_re + acc_im * acc_im);
    }
  }
  return out;
}

Matrix log_compress(const Matrix& m, double floor) {
  if (!(floor > 0.0)) throw ConfigError("log floor must be positive");
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    const double v = m.data()[i];
    if (v < 0.0) throw DataError("log compression of a negative amplitude");
    out.data()[i] = std::log(std::max(v, floor));
  }
  return out;
}

Spectrogram log_compress(Spectrogram s, double floor) {
  s.values = log_compress(s.values, floor);
  return s;
}

FeatureMatrix pad_to_width(const Spectrogram& s, std::size_t width) {
  if (width == 0) throw ConfigError("pad width must be positive");
  const std::size_t rows = s.values.rows();
  std::size_t cols = s.values.cols();
  if (cols > width) {
    std::cerr << "warning: spectrogram has " << cols << " columns, truncating to "
              << width << "\n";
    cols = width;
  }

  FeatureMatrix fm;
  fm.kind = s.kind;
  fm.bin_freqs_hz = s.bin_freqs_hz;
  fm.pad_columns = static_cast<std::uint32_t>(width - cols);
  fm.values = Matrix(rows, width, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = s.values.row(r);
    double* dst = fm.values.row(r);
    std::copy(src, src + cols, dst);
  }
  fm.column_times_s.assign(width, 0.0);
  std::copy(s.column_times_s.begin(), s.column_times_s.begin() + static_cast<std::ptrdiff_t>(cols),
            fm.column_times_s.begin());
  return fm;
}

namespace {

constexpr char kFeatureMagic[4] = {'S', 'F', 'F', 'M'};
constexpr std::uint16_t kFeatureVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(in), "truncated feature file");
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  require(static_cast<bool>(in), "truncated feature file");
}

}  // namespace

void write_feature_matrix(std::ostream& out, const FeatureMatrix& fm) {
  out.write(kFeatureMagic, 4);
  put<std::uint16_t>(out, kFeatureVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(fm.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fm.values.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fm.values.cols()));
  put<std::uint32_t>(out, fm.pad_columns);
  put_doubles(out, fm.values.data());
  put_doubles(out, fm.bin_freqs_hz);
  put_doubles(out, fm.column_times_s);
  if (!out) throw FormatError("feature matrix write failed");
}

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_feature_matrix(out, fm);
}

FeatureMatrix read_feature_matrix(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  require(static_cast<bool>(in) && std::memcmp(magic, kFeatureMagic, 4) == 0,
          "not a feature matrix file (bad magic)");
  const auto version = get<std::uint16_t>(in);
  require(version == kFeatureVersion, "unsupported feature file version");
  const auto kind = get<std::uint8_t>(in);
  require(kind <= 2, "unknown spectrogram kind in feature file");
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  const auto pad = get<std::uint32_t>(in);
  require(rows > 0 && cols > 0, "degenerate feature dimensions");
  require(pad < cols, "pad column count exceeds the matrix width");

  FeatureMatrix fm;
  fm.kind = static_cast<SpectrogramKind>(kind);
  fm.pad_columns = pad;
  fm.values = Matrix(rows, cols);
  get_doubles(in, fm.values.data());
  fm.bin_freqs_hz.resize(rows);
  get_doubles(in, fm.bin_freqs_hz);
  fm.column_times_s.resize(cols);
  get_doubles(in, fm.column_times_s);
  return fm;
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_feature_matrix(in);
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& fm) {
  std::ostringstream line;
  line.precision(17);
  for (std::size_t r = 0; r < fm.values.rows(); ++r) {
    line.str("");
    for (std::size_t c = 0; c < fm.values.cols(); ++c) {
      if (c) line << ',';
      line << fm.values(r, c);
    }
    line << '\n';
    out << line.str();
  }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& fm) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_feature_csv(out, fm);
}

void write_feature_pgm(std::ostream& out, const FeatureMatrix& fm) {
  const std::size_t rows = fm.values.rows();
  const std::size_t cols = fm.values.cols();
  const std::size_t live_cols = cols - fm.pad_columns;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < live_cols; ++c) {
      lo = std::min(lo, fm.values(r, c));
      hi = std::max(hi, fm.values(r, c));
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;

  out << "P5\n" << cols << " " << rows << "\n255\n";
  // Low frequencies at the bottom: emit the last row first.
  std::vector<unsigned char> scanline(cols);
  for (std::size_t r = rows; r-- > 0;) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c >= live_cols) {
        scanline[c] = 0;
      } else {
        const double t = (fm.values(r, c) - lo) / span;
        scanline[c] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
      }
    }
    out.write(reinterpret_cast<const char*>(scanline.data()),
              static_cast<std::streamsize>(cols));
  }
}

void write_feature_pgm(const std::filesystem::path& path, const FeatureMatrix& fm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_feature_pgm(out, fm);
}

}  // namespace sff

// sff/wav.cc
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

#include "sff/wav.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace sff {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatIeeeFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct Cursor {
  const std::uint8_t* p;
  std::size_t size;
  std::size_t pos = 0;

  bool has(std::size_t n) const { return pos + n <= size; }

  const std::uint8_t* take(std::size_t n) {
    if (!has(n)) throw FormatError("WAV file truncated");
    const std::uint8_t* out = p + pos;
    pos += n;
    return out;
  }

  std::uint32_t u32() {
    const std::uint8_t* b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  std::uint16_t u16() {
    const std::uint8_t* b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
};

struct FmtChunk {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint16_t block_align = 0;
};

FmtChunk parse_fmt(const std::uint8_t* body, std::size_t size) {
  if (size < 16) throw FormatError("fmt chunk too small");
  Cursor c{body, size};
  FmtChunk fmt;
  fmt.format_tag = c.u16();
  fmt.channels = c.u16();
  fmt.sample_rate = c.u32();
  c.u32();  // byte rate, unused
  fmt.block_align = c.u16();
  fmt.bits_per_sample = c.u16();
  if (fmt.format_tag == kFormatExtensible) {
    // cbSize, valid bits, channel mask, then the sub-format GUID whose
    // leading 16 bits carry the actual format tag.
    if (size < 40) throw FormatError("extensible fmt chunk too small");
    c.u16();
    c.u16();
    c.u32();
    fmt.format_tag = c.u16();
  }
  return fmt;
}

double decode_sample(const std::uint8_t* b, std::uint16_t format_tag,
                     std::uint16_t bits) {
  if (format_tag == kFormatIeeeFloat) {
    float f;
    std::memcpy(&f, b, 4);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 16: {
      const auto v = static_cast<std::int16_t>(b[0] | (b[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = b[0] | (b[1] << 8) | (b[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: {
      std::int32_t v;
      std::memcpy(&v, b, 4);
      return v / 2147483648.0;
    }
    default:
      throw UnsupportedCodecError("unsupported PCM depth");
  }
}

}  // namespace

SampledSignal decode_wav(const std::vector<std::uint8_t>& bytes,
                         std::optional<int> channel) {
  Cursor c{bytes.data(), bytes.size()};
  if (!c.has(12) || std::memcmp(c.take(4), "RIFF", 4) != 0) {
    throw FormatError("not a RIFF file");
  }
  c.u32();  // declared RIFF payload size; trust the actual byte count instead
  if (std::memcmp(c.take(4), "WAVE", 4) != 0) {
    throw FormatError("RIFF file is not WAVE");
  }

  bool have_fmt = false;
  FmtChunk fmt;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  while (c.has(8)) {
    char id[4];
    std::memcpy(id, c.take(4), 4);
    const std::uint32_t chunk_size = c.u32();
    if (!c.has(chunk_size)) throw FormatError("WAV chunk overruns the file");
    const std::uint8_t* body = c.take(chunk_size);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      fmt = parse_fmt(body, chunk_size);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_size = chunk_size;
    }
    // Chunks are word-aligned: an odd payload is followed by a pad byte.
    if ((chunk_size & 1) && c.has(1)) c.take(1);
  }

  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (data == nullptr) throw FormatError("missing data chunk");
  if (fmt.channels == 0) throw FormatError("fmt declares zero channels");
  if (fmt.sample_rate == 0) throw FormatError("fmt declares zero sample rate");

  if (fmt.format_tag == kFormatIeeeFloat) {
    if (fmt.bits_per_sample != 32) {
      throw UnsupportedCodecError("only 32-bit float WAV is supported");
    }
  } else if (fmt.format_tag == kFormatPcm) {
    if (fmt.bits_per_sample != 16 && fmt.bits_per_sample != 24 &&
        fmt.bits_per_sample != 32) {
      throw UnsupportedCodecError("unsupported PCM depth " +
                                  std::to_string(fmt.bits_per_sample));
    }
  } else {
    throw UnsupportedCodecError("unsupported codec tag " +
                                std::to_string(fmt.format_tag));
  }

  const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (fmt.block_align != 0 && fmt.block_align != frame_bytes) {
    throw FormatError("fmt block alignment disagrees with sample layout");
  }
  if (data_size % frame_bytes != 0) {
    throw FormatError("data chunk is not a whole number of frames");
  }
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw DataError("WAV contains no samples");

  int pick = 0;
  if (fmt.channels > 1) {
    if (!channel.has_value()) {
      throw ConfigError("file has " + std::to_string(fmt.channels) +
                        " channels; an explicit channel selection is required");
    }
    pick = *channel;
    if (pick < 0 || pick >= fmt.channels) {
      throw ConfigError("channel " + std::to_string(pick) + " out of range");
    }
  } else if (channel.has_value() && *channel != 0) {
    throw ConfigError("channel " + std::to_string(*channel) +
                      " requested from a mono file");
  }

  SampledSignal out;
  out.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  const std::uint8_t* frame = data + static_cast<std::size_t>(pick) * bytes_per_sample;
  for (std::size_t i = 0; i < frames; ++i, frame += frame_bytes) {
    const double v = decode_sample(frame, fmt.format_tag, fmt.bits_per_sample);
    if (!std::isfinite(v)) throw FormatError("non-finite sample in float data");
    out.samples[i] = v;
  }
  return out;
}

SampledSignal load_wav(const std::filesystem::path& path,
                       std::optional<int> channel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes, channel);
}

}  // namespace sff

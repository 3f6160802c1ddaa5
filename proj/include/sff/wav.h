// sff/wav.h
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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sff/signal.h"

namespace sff {

// RIFF/WAVE reader for little-endian PCM 16/24/32-bit integer and 32-bit
// float data. `fmt ` and `data` chunks are mandatory; unknown chunks are
// skipped. Integer samples are scaled to [-1, 1] by the type's full-scale
// value (e.g. 32767 -> 32767/32768 for 16-bit).
//
// Multi-channel files require an explicit zero-based channel selection;
// loading one without it raises ConfigError so that a silent down-mix can
// never corrupt timing-sensitive analysis.
SampledSignal load_wav(const std::filesystem::path& path,
                       std::optional<int> channel = std::nullopt);

// Same decoder over an in-memory byte image (used by tests and tools).
SampledSignal decode_wav(const std::vector<std::uint8_t>& bytes,
                         std::optional<int> channel = std::nullopt);

}  // namespace sff

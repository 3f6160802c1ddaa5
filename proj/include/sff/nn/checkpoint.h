// sff/nn/checkpoint.h
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
#include <iosfwd>
#include <vector>

#include "sff/nn/model.h"

namespace sff::nn {

// Checkpoint container: magic "SFFN", version u16, config digest u64, tensor
// count u32, then per tensor a length-prefixed name, a u32 rank with u64
// dims, and the values as little-endian doubles. Captures parameters, batch
// norm running statistics, Adam moments, and the step counter; round trips
// are bit exact.
void write_checkpoint(std::ostream& out, Model& model);
void write_checkpoint(const std::filesystem::path& path, Model& model);
std::vector<std::uint8_t> checkpoint_bytes(Model& model);

// Loads state into a model constructed with the same config; a digest or
// tensor-layout mismatch raises FormatError.
void read_checkpoint(std::istream& in, Model& model);
void read_checkpoint(const std::filesystem::path& path, Model& model);
void load_checkpoint_bytes(const std::vector<std::uint8_t>& bytes, Model& model);

}  // namespace sff::nn

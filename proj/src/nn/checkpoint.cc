// sff/nn/checkpoint.cc
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

#include "sff/nn/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace sff::nn {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'F', 'N'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated checkpoint");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, Model& model) {
  const std::vector<ParamRef> state = model.named_state();
  out.write(kMagic, 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint64_t>(out, model.config().digest());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.size()));
  for (const ParamRef& p : state) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    // Stored flat; the owning layer knows its geometry from the config.
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p.value->size()));
    out.write(reinterpret_cast<const char*>(p.value->data()),
              static_cast<std::streamsize>(p.value->size() * sizeof(double)));
  }
  if (!out) throw FormatError("checkpoint write failed");
}

void write_checkpoint(const std::filesystem::path& path, Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
}

std::vector<std::uint8_t> checkpoint_bytes(Model& model) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, model);
  const std::string s = out.str();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

void read_checkpoint(std::istream& in, Model& model) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion) throw FormatError("unsupported checkpoint version");
  const auto digest = get<std::uint64_t>(in);
  if (digest != model.config().digest()) {
    throw FormatError("checkpoint was written for a different model configuration");
  }

  std::vector<ParamRef> state = model.named_state();
  const auto count = get<std::uint32_t>(in);
  if (count != state.size()) {
    throw FormatError("checkpoint tensor count mismatch");
  }
  for (ParamRef& p : state) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p.name) {
      throw FormatError("checkpoint tensor '" + name + "' does not match expected '" +
                        p.name + "'");
    }
    const auto rank = get<std::uint32_t>(in);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      n *= static_cast<std::size_t>(get<std::uint64_t>(in));
    }
    if (n != p.value->size()) {
      throw FormatError("checkpoint tensor '" + name + "' has wrong size");
    }
    in.read(reinterpret_cast<char*>(p.value->data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw FormatError("truncated checkpoint");
  }
  model.finish_state_load();
}

void read_checkpoint(const std::filesystem::path& path, Model& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  read_checkpoint(in, model);
}

void load_checkpoint_bytes(const std::vector<std::uint8_t>& bytes, Model& model) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
  read_checkpoint(in, model);
}

}  // namespace sff::nn

// sff/manifest.h
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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sff/error.h"

namespace sff {

// The closed 4-class label set, in confusion-matrix row order.
inline constexpr std::array<const char*, 4> kClassNames = {"anger", "happy",
                                                           "neutral", "sad"};
inline constexpr std::size_t kNumClasses = 4;

int class_id_from_label(const std::string& label);

struct ManifestEntry {
  std::string id;
  std::string path;
  int label = 0;
  std::string session;
  std::string speaker;
  bool improvised = true;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// CSV with header `id,path,label,session,speaker,improvised`. Ids must be
// unique and labels must come from the closed class set.
Manifest load_manifest(const std::filesystem::path& path);

// Drops entries with improvised == false.
Manifest improvised_only(const Manifest& manifest);

// Raises FormatError on the first entry whose audio path does not exist.
void validate_paths(const Manifest& manifest);

// One leave-one-speaker-out fold: the held-out session contributes one
// validation and one test speaker, every other session trains.
struct FoldPlan {
  std::vector<std::string> train_sessions;
  std::string validation_speaker;
  std::string test_speaker;
  int fold_index = 0;
};

// One fold per session, the lexicographically first speaker of the held-out
// session validating and the other testing; both_orders doubles the folds by
// swapping the two roles. A speaker in more than one session is an error.
std::vector<FoldPlan> build_folds(const Manifest& manifest, bool both_orders = false);

// Mean-normalized inverse-frequency weights w_c = (total / C) / count_c, so
// a balanced set yields all ones. A zero count is an error.
std::vector<double> class_weights(const std::vector<std::size_t>& counts);

}  // namespace sff

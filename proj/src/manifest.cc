// sff/manifest.cc
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

#include "sff/manifest.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sff {

int class_id_from_label(const std::string& label) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (label == kClassNames[i]) return static_cast<int>(i);
  }
  throw FormatError("unknown class label '" + label + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest is empty");
  const std::string header = trim(line);
  if (header != "id,path,label,session,speaker,improvised") {
    throw FormatError("manifest header must be id,path,label,session,speaker,improvised");
  }

  Manifest manifest;
  std::set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(trim(line));
    if (f.size() != 6) {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": expected 6 fields, got " + std::to_string(f.size()));
    }
    ManifestEntry e;
    e.id = trim(f[0]);
    e.path = trim(f[1]);
    e.label = class_id_from_label(trim(f[2]));
    e.session = trim(f[3]);
    e.speaker = trim(f[4]);
    const std::string imp = trim(f[5]);
    if (imp == "1" || imp == "true") {
      e.improvised = true;
    } else if (imp == "0" || imp == "false") {
      e.improvised = false;
    } else {
      throw FormatError("manifest line " + std::to_string(line_no) +
                        ": improvised must be 0/1/true/false");
    }
    if (e.id.empty()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": empty id");
    }
    if (!seen_ids.insert(e.id).second) {
      throw FormatError("duplicate utterance id '" + e.id + "'");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

Manifest improvised_only(const Manifest& manifest) {
  Manifest out;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.improvised) out.entries.push_back(e);
  }
  return out;
}

void validate_paths(const Manifest& manifest) {
  for (const ManifestEntry& e : manifest.entries) {
    if (!std::filesystem::exists(e.path)) {
      throw FormatError("audio path does not exist: " + e.path + " (utterance " +
                        e.id + ")");
    }
  }
}

std::vector<FoldPlan> build_folds(const Manifest& manifest, bool both_orders) {
  // session -> sorted distinct speakers; speakers may not span sessions.
  std::map<std::string, std::set<std::string>> sessions;
  std::map<std::string, std::string> speaker_session;
  for (const ManifestEntry& e : manifest.entries) {
    auto [it, inserted] = speaker_session.emplace(e.speaker, e.session);
    if (!inserted && it->second != e.session) {
      throw FormatError("speaker '" + e.speaker + "' appears in sessions '" +
                        it->second + "' and '" + e.session + "'");
    }
    sessions[e.session].insert(e.speaker);
  }
  if (sessions.size() < 2) {
    throw DataError("leave-one-speaker-out needs at least 2 sessions");
  }

  std::vector<FoldPlan> folds;
  int index = 0;
  for (const auto& [held_out, speakers] : sessions) {
    if (speakers.size() != 2) {
      throw FormatError("session '" + held_out + "' has " +
                        std::to_string(speakers.size()) +
                        " speakers; folds need exactly 2 in the held-out session");
    }
    std::vector<std::string> train_sessions;
    for (const auto& [name, unused] : sessions) {
      if (name != held_out) train_sessions.push_back(name);
    }
    const std::string first = *speakers.begin();
    const std::string second = *std::next(speakers.begin());

    FoldPlan fold;
    fold.train_sessions = train_sessions;
    fold.validation_speaker = first;
    fold.test_speaker = second;
    fold.fold_index = index++;
    folds.push_back(fold);
    if (both_orders) {
      FoldPlan swapped = fold;
      std::swap(swapped.validation_speaker, swapped.test_speaker);
      swapped.fold_index = index++;
      folds.push_back(std::move(swapped));
    }
  }
  return folds;
}

std::vector<double> class_weights(const std::vector<std::size_t>& counts) {
  if (counts.empty()) throw ConfigError("class weight computation needs counts");
  std::size_t total = 0;
  for (std::size_t c : counts) {
    if (c == 0) throw ConfigError("class with zero samples cannot be weighted");
    total += c;
  }
  const double per_class = static_cast<double>(total) / static_cast<double>(counts.size());
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    weights[i] = per_class / static_cast<double>(counts[i]);
  }
  return weights;
}

}  // namespace sff

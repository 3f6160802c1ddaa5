// sff/metrics.h
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

#include <cstddef>
#include <string>
#include <vector>

#include "sff/error.h"

namespace sff {

// Confusion counts plus the two headline accuracies, both in percent.
// WA is correct-over-total; UWA is the mean of per-class recalls, i.e. the
// mean of the row-normalized diagonal.
struct EvalReport {
  std::vector<std::vector<std::size_t>> confusion;   // [true][predicted]
  std::vector<std::vector<double>> confusion_pct;    // row-normalized, percent
  double wa = 0.0;
  double uwa = 0.0;
  std::size_t total = 0;
};

// Mean of the segment posteriors, then argmax; ties break toward the lowest
// class index. Every posterior must be a distribution over the same classes.
int aggregate_utterance(const std::vector<std::vector<double>>& segment_posteriors);

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    std::size_t num_classes);

// Human-readable table with per-class rows and the WA/UWA summary line.
std::string format_report(const EvalReport& report,
                          const std::vector<std::string>& class_names);

// Machine-readable JSON with counts, percentages, WA and UWA.
std::string report_json(const EvalReport& report,
                        const std::vector<std::string>& class_names);

}  // namespace sff

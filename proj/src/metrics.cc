// sff/metrics.cc
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

#include "sff/metrics.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace sff {

int aggregate_utterance(const std::vector<std::vector<double>>& segment_posteriors) {
  if (segment_posteriors.empty()) {
    throw DataError("utterance aggregation needs at least one segment");
  }
  const std::size_t c = segment_posteriors.front().size();
  if (c == 0) throw DataError("empty posterior vector");
  std::vector<double> mean(c, 0.0);
  for (const std::vector<double>& p : segment_posteriors) {
    if (p.size() != c) throw ShapeError("posterior vectors disagree on class count");
    for (std::size_t i = 0; i < c; ++i) mean[i] += p[i];
  }
  int best = 0;
  for (std::size_t i = 1; i < c; ++i) {
    if (mean[i] > mean[best]) best = static_cast<int>(i);
  }
  return best;
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                    std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("prediction and label lists differ in length");
  }
  EvalReport report;
  report.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int t = labels[i], p = predictions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= num_classes) {
      throw DataError("label " + std::to_string(t) + " out of range");
    }
    if (p < 0 || static_cast<std::size_t>(p) >= num_classes) {
      throw DataError("prediction " + std::to_string(p) + " out of range");
    }
    report.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
  }

  report.total = predictions.size();
  report.confusion_pct.assign(num_classes, std::vector<double>(num_classes, 0.0));
  std::size_t correct = 0;
  double recall_sum = 0.0;
  std::size_t classes_present = 0;
  for (std::size_t t = 0; t < num_classes; ++t) {
    std::size_t row_total = 0;
    for (std::size_t p = 0; p < num_classes; ++p) row_total += report.confusion[t][p];
    correct += report.confusion[t][t];
    if (row_total > 0) {
      for (std::size_t p = 0; p < num_classes; ++p) {
        report.confusion_pct[t][p] =
            100.0 * static_cast<double>(report.confusion[t][p]) /
            static_cast<double>(row_total);
      }
      recall_sum += report.confusion_pct[t][t];
      ++classes_present;
    }
  }
  report.wa = report.total > 0
                  ? 100.0 * static_cast<double>(correct) / static_cast<double>(report.total)
                  : 0.0;
  report.uwa = classes_present > 0 ? recall_sum / static_cast<double>(classes_present) : 0.0;
  return report;
}

std::string format_report(const EvalReport& report,
                          const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::setw(10) << "";
  for (const std::string& name : class_names) out << std::setw(10) << name;
  out << "\n";
  for (std::size_t t = 0; t < class_names.size(); ++t) {
    out << std::setw(10) << class_names[t];
    for (std::size_t p = 0; p < class_names.size(); ++p) {
      out << std::setw(10) << report.confusion_pct[t][p];
    }
    out << "\n";
  }
  out << "WA: " << report.wa << "  UWA: " << report.uwa << "  (n=" << report.total
      << ")\n";
  return out.str();
}

std::string report_json(const EvalReport& report,
                        const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["classes"] = class_names;
  j["counts"] = report.confusion;
  j["percent"] = report.confusion_pct;
  j["wa"] = report.wa;
  j["uwa"] = report.uwa;
  j["total"] = report.total;
  return j.dump(2);
}

}  // namespace sff

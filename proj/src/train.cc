// sff/train.cc
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

#include "sff/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "sff/nn/checkpoint.h"

namespace sff {

std::string feature_filename(const std::string& utterance_id, int segment_index,
                             SpectrogramKind kind) {
  char seg[16];
  std::snprintf(seg, sizeof(seg), "seg%03d", segment_index);
  return utterance_id + "." + seg + "." + to_string(kind) + ".sffm";
}

FeatureDataset load_feature_dataset(const std::filesystem::path& dir,
                                    const Manifest& manifest, SpectrogramKind kind) {
  FeatureDataset dataset;
  const std::string suffix = std::string(".") + to_string(kind) + ".sffm";

  // One directory scan: `<id>.segNNN.<kind>.sffm` grouped by utterance id.
  std::map<std::string, std::vector<std::filesystem::path>> by_id;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    const std::string name = de.path().filename().string();
    if (name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const std::string stem = name.substr(0, name.size() - suffix.size());
    const auto seg_pos = stem.rfind(".seg");
    if (seg_pos == std::string::npos) continue;
    by_id[stem.substr(0, seg_pos)].push_back(de.path());
  }

  for (const ManifestEntry& entry : manifest.entries) {
    auto it = by_id.find(entry.id);
    if (it == by_id.end()) {
      throw DataError("no cached '" + std::string(to_string(kind)) +
                      "' features for utterance '" + entry.id + "' under " +
                      dir.string());
    }
    std::sort(it->second.begin(), it->second.end());
    int seg_index = 0;
    for (const auto& file : it->second) {
      SegmentFeature sf;
      sf.utterance_id = entry.id;
      sf.segment_index = seg_index++;
      sf.label = entry.label;
      sf.session = entry.session;
      sf.speaker = entry.speaker;
      sf.features = read_feature_matrix(file);
      if (dataset.segments.empty()) {
        dataset.feature_h = sf.features.values.rows();
        dataset.feature_w = sf.features.values.cols();
      } else if (sf.features.values.rows() != dataset.feature_h ||
                 sf.features.values.cols() != dataset.feature_w) {
        throw FormatError("feature shape mismatch in " + file.string());
      }
      dataset.segments.push_back(std::move(sf));
    }
  }
  return dataset;
}

namespace {

nn::Tensor batch_tensor(const FeatureDataset& dataset, const std::vector<std::size_t>& idx) {
  const std::size_t h = dataset.feature_h, w = dataset.feature_w;
  nn::Tensor x({idx.size(), 1, h, w});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Matrix& m = dataset.segments[idx[i]].features.values;
    std::copy(m.data().begin(), m.data().end(), x.data.begin() + static_cast<std::ptrdiff_t>(i * h * w));
  }
  return x;
}

int argmax_row(const nn::Tensor& probs, std::size_t row) {
  const std::size_t c = probs.dim(1);
  int best = 0;
  for (std::size_t j = 1; j < c; ++j) {
    if (probs.data[row * c + j] > probs.data[row * c + best]) best = static_cast<int>(j);
  }
  return best;
}

// Segment-level accuracy of the model on the given indices, batched to keep
// the activation footprint bounded.
double segment_accuracy(nn::Model& model, const FeatureDataset& dataset,
                        const std::vector<std::size_t>& idx, std::size_t batch_size,
                        bool unweighted, std::size_t num_classes) {
  std::vector<int> preds, labels;
  preds.reserve(idx.size());
  labels.reserve(idx.size());
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    std::vector<std::size_t> slice(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                   idx.begin() + static_cast<std::ptrdiff_t>(end));
    const nn::Tensor probs = model.forward(batch_tensor(dataset, slice), /*train=*/false);
    for (std::size_t i = 0; i < slice.size(); ++i) {
      preds.push_back(argmax_row(probs, i));
      labels.push_back(dataset.segments[slice[i]].label);
    }
  }
  const EvalReport report = evaluate(preds, labels, num_classes);
  return unweighted ? report.uwa : report.wa;
}

}  // namespace

FoldResult train_fold(const FoldPlan& fold, const FeatureDataset& dataset,
                      const nn::ModelConfig& model_config, const TrainConfig& config) {
  if (dataset.segments.empty()) throw DataError("empty feature dataset");
  if (config.batch_size < 2) throw ConfigError("batch size must be >= 2 for batch norm");

  const std::set<std::string> train_sessions(fold.train_sessions.begin(),
                                             fold.train_sessions.end());
  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t i = 0; i < dataset.segments.size(); ++i) {
    const SegmentFeature& sf = dataset.segments[i];
    if (train_sessions.count(sf.session)) {
      train_idx.push_back(i);
    } else if (sf.speaker == fold.validation_speaker) {
      val_idx.push_back(i);
    }
  }
  if (train_idx.size() < 2) {
    throw DataError("fold needs at least 2 training segments for batch norm");
  }
  if (val_idx.empty()) throw DataError("fold has no validation segments");

  const std::size_t num_classes = model_config.num_classes;
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i : train_idx) {
    counts[static_cast<std::size_t>(dataset.segments[i].label)] += 1;
  }
  const std::vector<double> weights = class_weights(counts);

  nn::Model model(model_config);
  Rng rng(config.seed);
  model.init_params(rng);

  FoldResult result;
  EarlyStopper stopper(config.patience);
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(train_idx);
    double loss_sum = 0.0;
    std::size_t loss_batches = 0;
    std::size_t train_correct = 0;

    for (std::size_t start = 0; start < train_idx.size();) {
      std::size_t end = std::min(train_idx.size(), start + config.batch_size);
      // A 1-sample remainder cannot batch-normalize; absorb it here instead.
      if (train_idx.size() - end == 1) end = train_idx.size();
      std::vector<std::size_t> batch(train_idx.begin() + static_cast<std::ptrdiff_t>(start),
                                     train_idx.begin() + static_cast<std::ptrdiff_t>(end));
      start = end;
      std::vector<int> targets(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        targets[i] = dataset.segments[batch[i]].label;
      }
      const nn::Tensor probs = model.forward(batch_tensor(dataset, batch), /*train=*/true, &rng);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (argmax_row(probs, i) == targets[i]) ++train_correct;
      }
      const double loss = model.loss_and_backward(probs, targets, weights);
      if (!std::isfinite(loss)) {
        throw Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(loss_batches));
      }
      model.adam_step(config.adam);
      loss_sum += loss;
      ++loss_batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_batches > 0 ? loss_sum / static_cast<double>(loss_batches) : 0.0;
    stats.train_wa = 100.0 * static_cast<double>(train_correct) /
                     static_cast<double>(train_idx.size());
    stats.val_wa = segment_accuracy(model, dataset, val_idx, config.batch_size,
                                    config.select_on_uwa, num_classes);
    result.history.push_back(stats);

    const bool had_improved = stats.val_wa > stopper.best_metric();
    const bool stop = stopper.update(stats.val_wa);
    if (had_improved) {
      result.best_epoch = epoch;
      result.best_val_metric = stats.val_wa;
      result.best_checkpoint = nn::checkpoint_bytes(model);
    }
    if (stop) break;
  }

  if (result.best_checkpoint.empty()) {
    // No epoch improved on -inf only if max_epochs == 0; keep the final state.
    result.best_checkpoint = nn::checkpoint_bytes(model);
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,train_wa,val_wa\n";
  char line[160];
  for (const EpochStats& e : history) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%.6g,%.6g\n", e.epoch, e.train_loss,
                  e.train_wa, e.val_wa);
    out << line;
  }
}

void predict_speaker_utterances(nn::Model& model, const FeatureDataset& dataset,
                                const std::string& speaker,
                                std::vector<int>* predictions, std::vector<int>* labels) {
  // utterance id -> (label, posteriors per segment), in first-seen order
  std::vector<std::string> order;
  std::map<std::string, std::pair<int, std::vector<std::vector<double>>>> by_utterance;
  const std::size_t c = model.config().num_classes;

  for (std::size_t i = 0; i < dataset.segments.size(); ++i) {
    const SegmentFeature& sf = dataset.segments[i];
    if (sf.speaker != speaker) continue;
    const nn::Tensor probs = model.forward(batch_tensor(dataset, {i}), /*train=*/false);
    std::vector<double> p(probs.data.begin(), probs.data.begin() + static_cast<std::ptrdiff_t>(c));
    auto it = by_utterance.find(sf.utterance_id);
    if (it == by_utterance.end()) {
      order.push_back(sf.utterance_id);
      by_utterance[sf.utterance_id] = {sf.label, {std::move(p)}};
    } else {
      it->second.second.push_back(std::move(p));
    }
  }

  predictions->clear();
  labels->clear();
  for (const std::string& id : order) {
    const auto& [label, posteriors] = by_utterance[id];
    predictions->push_back(aggregate_utterance(posteriors));
    labels->push_back(label);
  }
}

}  // namespace sff

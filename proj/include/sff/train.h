// sff/train.h
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
//
// Fold training: weighted cross-entropy over segment features, validation
// accuracy after every epoch, best-checkpoint selection, early stopping.

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "sff/manifest.h"
#include "sff/metrics.h"
#include "sff/nn/model.h"
#include "sff/spectrogram.h"

namespace sff {

// One cached segment feature with the bookkeeping needed for fold splits and
// utterance-level aggregation.
struct SegmentFeature {
  std::string utterance_id;
  int segment_index = 0;
  int label = 0;
  std::string session;
  std::string speaker;
  FeatureMatrix features;
};

struct FeatureDataset {
  std::vector<SegmentFeature> segments;
  std::size_t feature_h = 0;
  std::size_t feature_w = 0;
};

// Feature cache naming convention shared by the extract and train commands.
std::string feature_filename(const std::string& utterance_id, int segment_index,
                             SpectrogramKind kind);

// Loads every `<id>.seg*.<kind>.sffm` under `dir` for the manifest entries.
// All features must share one shape. Entries with no cached segments raise
// DataError.
FeatureDataset load_feature_dataset(const std::filesystem::path& dir,
                                    const Manifest& manifest, SpectrogramKind kind);

// Stop after `patience` consecutive epochs without a strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Feed one epoch's validation metric; true means training should stop now.
  bool update(double metric) {
    ++epoch_;
    if (metric > best_) {
      best_ = metric;
      best_epoch_ = epoch_;
      stale_ = 0;
      return false;
    }
    ++stale_;
    return stale_ >= patience_;
  }

  std::size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct TrainConfig {
  std::size_t max_epochs = 200;
  std::size_t batch_size = 16;
  std::size_t patience = 5;
  nn::AdamConfig adam;
  std::uint64_t seed = 0;
  // Model selection metric: validation WA by default, UWA behind the flag.
  bool select_on_uwa = false;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_wa = 0.0;
  double val_wa = 0.0;
};

struct FoldResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_val_metric = 0.0;
  std::vector<std::uint8_t> best_checkpoint;  // SFFN bytes at the best epoch
};

// Trains one fold: class weights from the fold's training split, shuffled
// mini-batches, Adam updates, per-epoch segment-level validation WA (or UWA),
// early stopping with the configured patience. Deterministic for a fixed
// seed. Throws Error with the batch id on a non-finite loss.
FoldResult train_fold(const FoldPlan& fold, const FeatureDataset& dataset,
                      const nn::ModelConfig& model_config, const TrainConfig& config);

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history);

// Utterance-level predictions for the given speaker via posterior averaging.
// Returns aligned (prediction, label) lists.
void predict_speaker_utterances(nn::Model& model, const FeatureDataset& dataset,
                                const std::string& speaker,
                                std::vector<int>* predictions, std::vector<int>* labels);

}  // namespace sff

// tests/train_test.cc
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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sff/nn/checkpoint.h"
#include "sff/rng.h"

using namespace sff;

namespace {

// Tiny separable dataset: class c lights up row c of an 8x10 feature plane,
// with seeded noise. Two sessions x two speakers.
FeatureDataset toy_dataset(std::uint64_t seed, std::size_t per_speaker = 12) {
  Rng rng(seed);
  FeatureDataset dataset;
  dataset.feature_h = 8;
  dataset.feature_w = 10;
  int id = 0;
  for (const char* session : {"s1", "s2"}) {
    for (const char* speaker_suffix : {"F", "M"}) {
      for (std::size_t u = 0; u < per_speaker; ++u) {
        SegmentFeature sf;
        sf.utterance_id = "utt" + std::to_string(id++);
        sf.segment_index = 0;
        sf.label = static_cast<int>(u % 4);
        sf.session = session;
        sf.speaker = std::string(session) + speaker_suffix;
        sf.features.kind = SpectrogramKind::kPitchSyncSff;
        sf.features.values = Matrix(8, 10);
        for (double& v : sf.features.values.data()) v = rng.uniform(-0.1, 0.1);
        for (std::size_t c = 0; c < 10; ++c) {
          sf.features.values(static_cast<std::size_t>(sf.label) * 2, c) += 2.0;
        }
        sf.features.bin_freqs_hz.assign(8, 0.0);
        sf.features.column_times_s.assign(10, 0.0);
        dataset.segments.push_back(std::move(sf));
      }
    }
  }
  return dataset;
}

nn::ModelConfig toy_model() {
  nn::ModelConfig config;
  config.input_h = 8;
  config.input_w = 10;
  config.blocks = {{4, 3, 3, 3, 4}};
  config.dense_width = 16;
  config.num_classes = 4;
  config.dropout_rate = 0.0;
  return config;
}

FoldPlan toy_fold() {
  FoldPlan fold;
  fold.train_sessions = {"s1"};
  fold.validation_speaker = "s2F";
  fold.test_speaker = "s2M";
  fold.fold_index = 0;
  return fold;
}

}  // namespace

TEST_CASE("early stopping follows the patience definition") {
  EarlyStopper stopper(5);
  const double vals[] = {50, 60, 59, 58, 57, 56, 55};
  std::size_t stopped_after = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    if (stopper.update(vals[i])) {
      stopped_after = i + 1;
      break;
    }
  }
  CHECK(stopped_after == 7);
  CHECK(stopper.best_epoch() == 2);
  CHECK(stopper.best_metric() == 60.0);
}

TEST_CASE("early stopping never fires while the metric improves") {
  EarlyStopper stopper(3);
  for (double v : {10.0, 20.0, 30.0, 40.0}) CHECK(!stopper.update(v));
  CHECK(stopper.best_epoch() == 4);
}

TEST_CASE("a single-epoch budget returns the first-epoch checkpoint") {
  TrainConfig config;
  config.max_epochs = 1;
  config.batch_size = 8;
  config.seed = 3;
  const FeatureDataset dataset = toy_dataset(3);
  const FoldResult result = train_fold(toy_fold(), dataset, toy_model(), config);
  CHECK(result.history.size() == 1);
  CHECK(result.best_epoch == 1);
  CHECK(!result.best_checkpoint.empty());
}

TEST_CASE("training a separable toy set converges and is reproducible") {
  TrainConfig config;
  config.max_epochs = 60;
  config.batch_size = 8;
  config.patience = 60;  // exercise the full budget here
  config.seed = 11;

  const FeatureDataset dataset = toy_dataset(7);
  const FoldResult a = train_fold(toy_fold(), dataset, toy_model(), config);
  const FoldResult b = train_fold(toy_fold(), dataset, toy_model(), config);

  REQUIRE(!a.history.empty());
  double best_train = 0.0, best_val = 0.0;
  for (const EpochStats& e : a.history) {
    best_train = std::max(best_train, e.train_wa);
    best_val = std::max(best_val, e.val_wa);
  }
  CHECK(best_train >= 95.0);
  CHECK(best_val >= 75.0);

  // Bit-identical across runs with one seed.
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].train_wa == b.history[i].train_wa);
    CHECK(a.history[i].val_wa == b.history[i].val_wa);
  }
  CHECK(a.best_checkpoint == b.best_checkpoint);
}

TEST_CASE("fold splits never leak the held-out speakers into training") {
  // Training on session s1 only; validation speaker from s2.
  TrainConfig config;
  config.max_epochs = 2;
  config.batch_size = 8;
  config.seed = 5;
  const FeatureDataset dataset = toy_dataset(5);
  // A fold whose validation speaker does not exist must fail loudly.
  FoldPlan bad = toy_fold();
  bad.validation_speaker = "nobody";
  CHECK_THROWS_AS(train_fold(bad, dataset, toy_model(), config), DataError);
}

TEST_CASE("history CSV has the documented header and one row per epoch") {
  TrainConfig config;
  config.max_epochs = 3;
  config.batch_size = 8;
  config.patience = 10;
  config.seed = 2;
  const FoldResult result = train_fold(toy_fold(), toy_dataset(2), toy_model(), config);

  const auto dir = std::filesystem::temp_directory_path() / "sffser_train_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "history.csv";
  write_history_csv(path, result.history);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "epoch,train_loss,train_wa,val_wa");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == result.history.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("utterance predictions aggregate segment posteriors per speaker") {
  TrainConfig config;
  config.max_epochs = 40;
  config.batch_size = 8;
  config.patience = 40;
  config.seed = 21;
  const FeatureDataset dataset = toy_dataset(21);
  const FoldResult result = train_fold(toy_fold(), dataset, toy_model(), config);

  nn::Model model(toy_model());
  nn::load_checkpoint_bytes(result.best_checkpoint, model);

  std::vector<int> preds, labels;
  predict_speaker_utterances(model, dataset, "s2M", &preds, &labels);
  REQUIRE(preds.size() == 12);  // 12 utterances for the test speaker
  REQUIRE(labels.size() == 12);
  const EvalReport report = evaluate(preds, labels, 4);
  CHECK(report.wa >= 75.0);
}

TEST_CASE("feature cache naming convention") {
  CHECK(feature_filename("utt7", 3, SpectrogramKind::kPitchSyncSff) ==
        "utt7.seg003.pitch_sync_sff.sffm");
  CHECK(feature_filename("a.b", 0, SpectrogramKind::kStft) == "a.b.seg000.stft.sffm");
}

TEST_CASE("feature dataset round trips through the cache directory") {
  const auto dir = std::filesystem::temp_directory_path() / "sffser_ds_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  const FeatureDataset dataset = toy_dataset(1, 2);
  Manifest manifest;
  for (const SegmentFeature& sf : dataset.segments) {
    write_feature_matrix(dir / feature_filename(sf.utterance_id, sf.segment_index,
                                                SpectrogramKind::kPitchSyncSff),
                         sf.features);
    ManifestEntry e;
    e.id = sf.utterance_id;
    e.path = "/dev/null";
    e.label = sf.label;
    e.session = sf.session;
    e.speaker = sf.speaker;
    manifest.entries.push_back(e);
  }

  const FeatureDataset loaded =
      load_feature_dataset(dir, manifest, SpectrogramKind::kPitchSyncSff);
  REQUIRE(loaded.segments.size() == dataset.segments.size());
  CHECK(loaded.feature_h == 8);
  CHECK(loaded.feature_w == 10);
  for (std::size_t i = 0; i < loaded.segments.size(); ++i) {
    CHECK(loaded.segments[i].label == dataset.segments[i].label);
    CHECK(loaded.segments[i].features.values.data() ==
          dataset.segments[i].features.values.data());
  }

  Manifest missing = manifest;
  ManifestEntry ghost;
  ghost.id = "ghost";
  ghost.path = "/dev/null";
  ghost.label = 0;
  ghost.session = "s1";
  ghost.speaker = "s1F";
  missing.entries.push_back(ghost);
  CHECK_THROWS_AS(load_feature_dataset(dir, missing, SpectrogramKind::kPitchSyncSff),
                  DataError);
  std::filesystem::remove_all(dir);
}

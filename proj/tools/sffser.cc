// tools/sffser.cc
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
// Command-line front end: feature extraction, GCI listing, spectrogram
// rendering, corpus scanning, fold training, and evaluation. Logs go to
// stderr; data goes to files or stdout. Exit codes: 0 success, 1 runtime
// failure, 2 usage error.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sff/extract.h"
#include "sff/manifest.h"
#include "sff/metrics.h"
#include "sff/nn/checkpoint.h"
#include "sff/train.h"
#include "sff/wav.h"

namespace fs = std::filesystem;
using namespace sff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct DspFlags {
  ExtractConfig config;
  double trend_window_ms = 0.0;  // 0 = automatic pitch-adaptive window
  int channel = -1;              // -1 = mono only
};

void add_dsp_flags(CLI::App* cmd, DspFlags& flags) {
  cmd->add_option("--seg-seconds", flags.config.seg_seconds,
                  "Segment duration in seconds")
      ->capture_default_str();
  cmd->add_option("--band-lo", flags.config.band_lo_hz, "Analysis band low edge (Hz)")
      ->capture_default_str();
  cmd->add_option("--band-hi", flags.config.band_hi_hz, "Analysis band high edge (Hz)")
      ->capture_default_str();
  cmd->add_option("--spacing", flags.config.spacing_hz, "SFF bin spacing (Hz)")
      ->capture_default_str();
  cmd->add_option("--pole-radius", flags.config.pole_radius,
                  "SFF pole radius, in (0,1)")
      ->capture_default_str();
  cmd->add_option("--pad-width", flags.config.pad_width,
                  "Fixed feature width after zero padding")
      ->capture_default_str();
  cmd->add_option("--log-floor", flags.config.log_floor,
                  "Amplitude floor before the log")
      ->capture_default_str();
  cmd->add_flag("--inclusive-gci-sum", flags.config.inclusive_gci_sum,
                "Literal inclusive-interval averaging instead of the half-open mean");
  cmd->add_option("--trend-passes", flags.config.zff.trend_passes,
                  "ZFF trend-removal passes")
      ->capture_default_str();
  cmd->add_option("--resonator-passes", flags.config.zff.resonator_passes,
                  "ZFF zero-frequency resonator passes")
      ->capture_default_str();
  cmd->add_option("--trend-window-ms", flags.trend_window_ms,
                  "Fixed ZFF trend window in ms (0 = pitch-adaptive)")
      ->capture_default_str();
  cmd->add_option("--stft-frame-ms", flags.config.stft.frame_ms, "STFT frame (ms)")
      ->capture_default_str();
  cmd->add_option("--stft-hop-ms", flags.config.stft.hop_ms, "STFT hop (ms)")
      ->capture_default_str();
  cmd->add_option("--dft-length", flags.config.stft.dft_length, "STFT DFT length")
      ->capture_default_str();
  cmd->add_option("--frame-ms", flags.config.fixed_frame_ms,
                  "Fixed-frame SFF frame (ms)")
      ->capture_default_str();
  cmd->add_option("--overlap", flags.config.fixed_overlap_fraction,
                  "Fixed-frame overlap fraction in [0,1)")
      ->capture_default_str();
  cmd->add_option("--channel", flags.channel,
                  "Zero-based channel for multi-channel files (-1 = require mono)")
      ->capture_default_str();
}

ExtractConfig resolve(const DspFlags& flags) {
  ExtractConfig config = flags.config;
  if (flags.trend_window_ms > 0.0) {
    config.zff.trend_window_mode = ZffConfig::TrendWindow::kFixed;
    config.zff.fixed_window_ms = flags.trend_window_ms;
  }
  if (flags.channel >= 0) config.channel = flags.channel;
  return config;
}

struct InputSet {
  // (utterance id, audio path) pairs.
  std::vector<std::pair<std::string, std::string>> items;
};

InputSet gather_inputs(const std::vector<std::string>& files,
                       const std::string& manifest_path,
                       const std::string& input_dir, bool improvised_filter) {
  InputSet in;
  if (!manifest_path.empty()) {
    Manifest manifest = load_manifest(manifest_path);
    if (improvised_filter) manifest = improvised_only(manifest);
    for (const ManifestEntry& e : manifest.entries) in.items.emplace_back(e.id, e.path);
  }
  for (const std::string& f : files) {
    in.items.emplace_back(fs::path(f).stem().string(), f);
  }
  if (!input_dir.empty()) {
    std::vector<fs::path> found;
    for (const auto& de : fs::directory_iterator(input_dir)) {
      if (de.path().extension() == ".wav") found.push_back(de.path());
    }
    std::sort(found.begin(), found.end());
    for (const auto& p : found) in.items.emplace_back(p.stem().string(), p.string());
  }
  return in;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<SpectrogramKind> parse_kinds(const std::string& kind) {
  if (kind == "all") {
    return {SpectrogramKind::kPitchSyncSff, SpectrogramKind::kSffFixedFrame,
            SpectrogramKind::kStft};
  }
  return {spectrogram_kind_from_string(kind)};
}

// --------------------------------------------------------------------------
// extract

int cmd_extract(const InputSet& inputs, const std::string& out_dir,
                const std::string& kind, const DspFlags& flags, int jobs,
                bool also_csv) {
  if (inputs.items.empty()) {
    std::cerr << "no input files\n";
    return kExitUsage;
  }
  const ExtractConfig config = resolve(flags);
  const std::vector<SpectrogramKind> kinds = parse_kinds(kind);
  fs::create_directories(out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  std::mutex log_mutex;
  std::atomic<std::size_t> files_written{0};
  std::atomic<std::size_t> failed{0};

  parallel_for(inputs.items.size(), jobs, [&](std::size_t i) {
    const auto& [id, path] = inputs.items[i];
    try {
      const SampledSignal signal = load_wav(path, config.channel);
      const auto segments = segment_utterance(signal, config.seg_seconds, id);
      for (const Segment& seg : segments) {
        const std::vector<FeatureMatrix> features =
            extract_segment_kinds(seg.signal, kinds, config);
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          const fs::path out =
              fs::path(out_dir) / feature_filename(id, seg.index, kinds[k]);
          write_feature_matrix(out, features[k]);
          if (also_csv) {
            write_feature_csv(fs::path(out).replace_extension(".csv"), features[k]);
          }
          files_written.fetch_add(1);
        }
      }
    } catch (const std::exception& e) {
      failed.fetch_add(1);
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "error: " << path << ": " << e.what() << "\n";
    }
  });

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "extracted " << files_written.load() << " feature files from "
            << inputs.items.size() - failed.load() << "/" << inputs.items.size()
            << " inputs in " << std::fixed << std::setprecision(2) << elapsed
            << " s\n";
  if (failed.load() == inputs.items.size()) return kExitFailure;
  return kExitOk;
}

// --------------------------------------------------------------------------
// gci

int cmd_gci(const InputSet& inputs, const std::string& out_dir, bool seconds,
            const DspFlags& flags, int jobs) {
  if (inputs.items.empty()) {
    std::cerr << "no input files\n";
    return kExitUsage;
  }
  const ExtractConfig config = resolve(flags);

  auto format_gcis = [&](const GciSequence& gcis, std::ostream& out) {
    char buf[64];
    for (std::size_t loc : gcis.locations) {
      if (seconds) {
        std::snprintf(buf, sizeof(buf), "%.6f",
                      static_cast<double>(loc) / gcis.sample_rate_hz);
        out << buf << "\n";
      } else {
        out << loc << "\n";
      }
    }
  };

  std::mutex log_mutex;
  std::atomic<std::size_t> failed{0};
  const bool to_stdout = out_dir.empty();
  if (!to_stdout) fs::create_directories(out_dir);

  parallel_for(inputs.items.size(), to_stdout ? 1 : jobs, [&](std::size_t i) {
    const auto& [id, path] = inputs.items[i];
    try {
      const SampledSignal signal = load_wav(path, config.channel);
      const GciSequence gcis = detect_gci(signal, config.zff);
      if (to_stdout) {
        format_gcis(gcis, std::cout);
      } else {
        std::ofstream out(fs::path(out_dir) / (id + ".gci"));
        format_gcis(gcis, out);
      }
    } catch (const std::exception& e) {
      failed.fetch_add(1);
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "error: " << path << ": " << e.what() << "\n";
    }
  });
  if (failed.load() == inputs.items.size()) return kExitFailure;
  return kExitOk;
}

// --------------------------------------------------------------------------
// render

int cmd_render(const InputSet& inputs, const std::string& out_dir,
               const std::string& kind, const DspFlags& flags, bool also_csv) {
  if (inputs.items.empty()) {
    std::cerr << "no input files\n";
    return kExitUsage;
  }
  const ExtractConfig config = resolve(flags);
  std::vector<SpectrogramKind> kinds;
  if (kind == "both") {
    kinds = {SpectrogramKind::kPitchSyncSff, SpectrogramKind::kStft};
  } else {
    kinds = parse_kinds(kind);
  }
  fs::create_directories(out_dir);

  std::size_t failed = 0;
  for (const auto& [id, path] : inputs.items) {
    try {
      const SampledSignal signal = load_wav(path, config.channel);
      for (const Segment& seg : segment_utterance(signal, config.seg_seconds, id)) {
        for (SpectrogramKind k : kinds) {
          const FeatureMatrix fm = extract_segment(seg.signal, k, config);
          fs::path base = fs::path(out_dir) / feature_filename(id, seg.index, k);
          write_feature_pgm(base.replace_extension(".pgm"), fm);
          if (also_csv) write_feature_csv(base.replace_extension(".csv"), fm);
        }
      }
    } catch (const std::exception& e) {
      ++failed;
      std::cerr << "error: " << path << ": " << e.what() << "\n";
    }
  }
  if (failed == inputs.items.size()) return kExitFailure;
  return kExitOk;
}

// --------------------------------------------------------------------------
// scan

int cmd_scan(const std::string& manifest_path, const DspFlags& flags,
             bool improvised_filter) {
  Manifest manifest = load_manifest(manifest_path);
  if (improvised_filter) manifest = improvised_only(manifest);
  validate_paths(manifest);
  const std::size_t width = scan_max_gci(manifest, resolve(flags));
  std::cout << width << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// train / evaluate

nn::ModelConfig parse_model_flags(const std::string& blocks_spec, std::size_t dense,
                                  std::size_t classes, double dropout,
                                  bool no_dense_relu, std::size_t input_h,
                                  std::size_t input_w) {
  nn::ModelConfig config;
  config.input_h = input_h;
  config.input_w = input_w;
  config.dense_width = dense;
  config.num_classes = classes;
  config.dropout_rate = dropout;
  config.dense_relu = !no_dense_relu;

  config.blocks.clear();
  std::istringstream ss(blocks_spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    nn::BlockSpec block;
    if (std::sscanf(token.c_str(), "%zu:%zux%zu:%zux%zu", &block.channels,
                    &block.kernel_h, &block.kernel_w, &block.pool_h,
                    &block.pool_w) != 5) {
      throw ConfigError("bad block spec '" + token +
                        "' (want channels:KHxKW:PHxPW)");
    }
    config.blocks.push_back(block);
  }
  if (config.blocks.empty()) throw ConfigError("empty --blocks specification");
  return config;
}

int cmd_train(const std::string& manifest_path, const std::string& features_dir,
              const std::string& kind, const std::string& out_dir,
              const std::string& blocks_spec, std::size_t dense, std::size_t classes,
              double dropout, bool no_dense_relu, TrainConfig train_config,
              bool both_orders, bool improvised_filter, int only_fold) {
  Manifest manifest = load_manifest(manifest_path);
  if (improvised_filter) manifest = improvised_only(manifest);
  const FeatureDataset dataset =
      load_feature_dataset(features_dir, manifest, spectrogram_kind_from_string(kind));
  const auto folds = build_folds(manifest, both_orders);
  fs::create_directories(out_dir);

  const nn::ModelConfig model_config =
      parse_model_flags(blocks_spec, dense, classes, dropout, no_dense_relu,
                        dataset.feature_h, dataset.feature_w);

  if (only_fold >= static_cast<int>(folds.size())) {
    throw ConfigError("--fold " + std::to_string(only_fold) + " out of range; " +
                      std::to_string(folds.size()) + " folds exist");
  }

  const std::uint64_t base_seed = train_config.seed;
  for (const FoldPlan& fold : folds) {
    if (only_fold >= 0 && fold.fold_index != only_fold) continue;
    TrainConfig fold_config = train_config;
    fold_config.seed = base_seed + static_cast<std::uint64_t>(fold.fold_index);
    const auto t0 = std::chrono::steady_clock::now();
    const FoldResult result = train_fold(fold, dataset, model_config, fold_config);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string tag = "fold" + std::to_string(fold.fold_index);
    std::ofstream ckpt(fs::path(out_dir) / (tag + ".sffn"), std::ios::binary);
    ckpt.write(reinterpret_cast<const char*>(result.best_checkpoint.data()),
               static_cast<std::streamsize>(result.best_checkpoint.size()));
    if (!ckpt) throw FormatError("cannot write checkpoint for " + tag);
    write_history_csv(fs::path(out_dir) / (tag + ".history.csv"), result.history);

    std::cerr << tag << ": " << result.history.size() << " epochs, best epoch "
              << result.best_epoch << " (val " << std::fixed << std::setprecision(2)
              << result.best_val_metric << "), " << elapsed << " s\n";
  }
  return kExitOk;
}

EvalReport evaluate_predictions_csv(const std::string& path, std::string* table_out) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open predictions file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,predicted,label", 0) != 0) {
    throw FormatError("predictions file must start with header id,predicted,label");
  }
  std::vector<int> preds, labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, pred, label;
    if (!std::getline(ss, id, ',') || !std::getline(ss, pred, ',') ||
        !std::getline(ss, label, ',')) {
      throw FormatError("bad predictions row: " + line);
    }
    preds.push_back(class_id_from_label(pred));
    labels.push_back(class_id_from_label(label));
  }
  const EvalReport report = evaluate(preds, labels, kNumClasses);
  if (table_out) {
    *table_out = format_report(
        report, std::vector<std::string>(kClassNames.begin(), kClassNames.end()));
  }
  return report;
}

int cmd_evaluate(const std::string& manifest_path, const std::string& features_dir,
                 const std::string& kind, const std::string& checkpoints_dir,
                 const std::string& predictions_path, const std::string& out_dir,
                 bool both_orders, bool improvised_filter,
                 const std::string& blocks_spec, std::size_t dense,
                 std::size_t classes, double dropout, bool no_dense_relu) {
  const std::vector<std::string> class_names(kClassNames.begin(), kClassNames.end());
  if (!out_dir.empty()) fs::create_directories(out_dir);

  if (!predictions_path.empty()) {
    std::string table;
    const EvalReport report = evaluate_predictions_csv(predictions_path, &table);
    std::cout << table;
    if (!out_dir.empty()) {
      std::ofstream out(fs::path(out_dir) / "report.json");
      out << report_json(report, class_names) << "\n";
    }
    return kExitOk;
  }

  Manifest manifest = load_manifest(manifest_path);
  if (improvised_filter) manifest = improvised_only(manifest);
  const FeatureDataset dataset =
      load_feature_dataset(features_dir, manifest, spectrogram_kind_from_string(kind));
  const auto folds = build_folds(manifest, both_orders);

  const nn::ModelConfig model_config =
      parse_model_flags(blocks_spec, dense, classes, dropout, no_dense_relu,
                        dataset.feature_h, dataset.feature_w);

  nlohmann::json folds_json = nlohmann::json::array();
  std::vector<int> pooled_preds, pooled_labels;
  for (const FoldPlan& fold : folds) {
    const std::string tag = "fold" + std::to_string(fold.fold_index);
    const fs::path ckpt_path = fs::path(checkpoints_dir) / (tag + ".sffn");
    if (!fs::exists(ckpt_path)) {
      std::cerr << "warning: " << ckpt_path.string() << " missing, skipping fold\n";
      continue;
    }

    nn::Model model(model_config);
    try {
      nn::read_checkpoint(ckpt_path, model);
    } catch (const FormatError& e) {
      throw FormatError(ckpt_path.string() + ": " + e.what() +
                        " (pass the same model flags used for training)");
    }

    std::vector<int> preds, labels;
    predict_speaker_utterances(model, dataset, fold.test_speaker, &preds, &labels);
    const EvalReport report = evaluate(preds, labels, model_config.num_classes);
    pooled_preds.insert(pooled_preds.end(), preds.begin(), preds.end());
    pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());

    std::cout << tag << " (test speaker " << fold.test_speaker << ")\n"
              << format_report(report, class_names) << "\n";
    nlohmann::json j = nlohmann::json::parse(report_json(report, class_names));
    j["fold"] = fold.fold_index;
    j["test_speaker"] = fold.test_speaker;
    folds_json.push_back(j);
  }

  if (pooled_labels.empty()) {
    std::cerr << "no folds evaluated\n";
    return kExitFailure;
  }
  const EvalReport pooled = evaluate(pooled_preds, pooled_labels, kNumClasses);
  std::cout << "pooled over " << folds_json.size() << " folds\n"
            << format_report(pooled, class_names);

  if (!out_dir.empty()) {
    nlohmann::json top;
    top["folds"] = folds_json;
    top["pooled"] = nlohmann::json::parse(report_json(pooled, class_names));
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << top.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pitch-synchronous SFF spectrogram toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file with key=value lines");

  // ---- extract
  auto* extract = app.add_subcommand("extract", "Extract feature matrices from audio");
  std::vector<std::string> ex_files;
  std::string ex_manifest, ex_input_dir, ex_out = "features", ex_kind = "pitch_sync_sff";
  int ex_jobs = 1;
  bool ex_csv = false, ex_improvised = false;
  DspFlags ex_flags;
  extract->add_option("files", ex_files, "WAV files");
  extract->add_option("--manifest", ex_manifest, "Manifest CSV");
  extract->add_option("--input-dir", ex_input_dir, "Directory of WAV files");
  extract->add_option("--out", ex_out, "Output directory")->capture_default_str();
  extract->add_option("--kind", ex_kind,
                      "pitch_sync_sff | sff_fixed_frame | stft | all")
      ->capture_default_str();
  extract->add_option("--jobs", ex_jobs, "Parallel workers")->capture_default_str();
  extract->add_flag("--csv", ex_csv, "Also write CSV next to each feature file");
  extract->add_flag("--improvised-only", ex_improvised,
                    "Keep only improvised manifest entries");
  add_dsp_flags(extract, ex_flags);

  // ---- gci
  auto* gci = app.add_subcommand("gci", "Detect glottal closure instants");
  std::vector<std::string> gci_files;
  std::string gci_manifest, gci_input_dir, gci_out;
  bool gci_seconds = false;
  int gci_jobs = 1;
  DspFlags gci_flags;
  gci->add_option("files", gci_files, "WAV files");
  gci->add_option("--manifest", gci_manifest, "Manifest CSV");
  gci->add_option("--input-dir", gci_input_dir, "Directory of WAV files");
  gci->add_option("--out", gci_out, "Output directory (default: stdout)");
  gci->add_flag("--seconds", gci_seconds, "Emit seconds (6 decimals) not sample indices");
  gci->add_option("--jobs", gci_jobs, "Parallel workers")->capture_default_str();
  add_dsp_flags(gci, gci_flags);

  // ---- render
  auto* render = app.add_subcommand("render", "Render spectrograms to PGM images");
  std::vector<std::string> r_files;
  std::string r_manifest, r_input_dir, r_out = "render", r_kind = "both";
  bool r_csv = false;
  DspFlags r_flags;
  render->add_option("files", r_files, "WAV files");
  render->add_option("--manifest", r_manifest, "Manifest CSV");
  render->add_option("--input-dir", r_input_dir, "Directory of WAV files");
  render->add_option("--out", r_out, "Output directory")->capture_default_str();
  render->add_option("--kind", r_kind,
                     "pitch_sync_sff | sff_fixed_frame | stft | all | both")
      ->capture_default_str();
  render->add_flag("--csv", r_csv, "Also write CSV exports");
  add_dsp_flags(render, r_flags);

  // ---- scan
  auto* scan = app.add_subcommand(
      "scan", "Report the maximum pitch-synchronous column count of a corpus");
  std::string s_manifest;
  bool s_improvised = false;
  DspFlags s_flags;
  scan->add_option("--manifest", s_manifest, "Manifest CSV")->required();
  scan->add_flag("--improvised-only", s_improvised,
                 "Keep only improvised manifest entries");
  add_dsp_flags(scan, s_flags);

  // ---- train
  auto* train = app.add_subcommand("train", "Train LOSO folds on cached features");
  std::string t_manifest, t_features, t_kind = "pitch_sync_sff", t_out = "runs";
  std::string t_blocks = "16:12x16:90x135,24:8x12:34x50,32:5x7:6x8";
  std::size_t t_dense = 64, t_classes = 4;
  double t_dropout = 0.5;
  bool t_no_dense_relu = false, t_both_orders = false, t_improvised = false;
  bool t_select_uwa = false;
  int t_fold = -1;
  TrainConfig t_config;
  train->add_option("--manifest", t_manifest, "Manifest CSV")->required();
  train->add_option("--features", t_features, "Feature cache directory")->required();
  train->add_option("--kind", t_kind, "Feature kind to train on")->capture_default_str();
  train->add_option("--out", t_out, "Output directory")->capture_default_str();
  train->add_option("--blocks", t_blocks, "CNN blocks as channels:KHxKW:PHxPW,...")
      ->capture_default_str();
  train->add_option("--dense", t_dense, "Dense layer width")->capture_default_str();
  train->add_option("--classes", t_classes, "Class count")->capture_default_str();
  train->add_option("--dropout", t_dropout, "Dropout rate after the dense layer")
      ->capture_default_str();
  train->add_flag("--no-dense-relu", t_no_dense_relu,
                  "Drop the ReLU after the dense layer");
  train->add_option("--epochs", t_config.max_epochs, "Epoch budget")
      ->capture_default_str();
  train->add_option("--batch", t_config.batch_size, "Mini-batch size")
      ->capture_default_str();
  train->add_option("--patience", t_config.patience,
                    "Early-stopping patience (epochs)")
      ->capture_default_str();
  train->add_option("--lr", t_config.adam.learning_rate, "Adam learning rate")
      ->capture_default_str();
  train->add_option("--beta1", t_config.adam.beta1, "Adam beta1")->capture_default_str();
  train->add_option("--beta2", t_config.adam.beta2, "Adam beta2")->capture_default_str();
  train->add_option("--adam-eps", t_config.adam.epsilon, "Adam epsilon")
      ->capture_default_str();
  train->add_option("--seed", t_config.seed, "Base RNG seed (fold i uses seed+i)")
      ->capture_default_str();
  train->add_flag("--select-uwa", t_select_uwa,
                  "Select checkpoints on validation UWA instead of WA");
  train->add_flag("--both-orders", t_both_orders,
                  "Also train folds with validation/test speakers swapped");
  train->add_flag("--improvised-only", t_improvised,
                  "Keep only improvised manifest entries");
  train->add_option("--fold", t_fold, "Train only this fold index (-1 = all)")
      ->capture_default_str();

  // ---- evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate checkpoints or predictions");
  std::string e_manifest, e_features, e_kind = "pitch_sync_sff", e_checkpoints;
  std::string e_predictions, e_out;
  std::string e_blocks = "16:12x16:90x135,24:8x12:34x50,32:5x7:6x8";
  std::size_t e_dense = 64, e_classes = 4;
  double e_dropout = 0.5;
  bool e_no_dense_relu = false;
  bool e_both_orders = false, e_improvised = false;
  eval->add_option("--manifest", e_manifest, "Manifest CSV");
  eval->add_option("--features", e_features, "Feature cache directory");
  eval->add_option("--kind", e_kind, "Feature kind")->capture_default_str();
  eval->add_option("--checkpoints", e_checkpoints, "Directory with fold<k>.sffn");
  eval->add_option("--predictions", e_predictions,
                   "CSV id,predicted,label to score directly");
  eval->add_option("--out", e_out, "Directory for report.json");
  eval->add_option("--blocks", e_blocks, "Model blocks used at training time")
      ->capture_default_str();
  eval->add_option("--dense", e_dense, "Dense width used at training time")
      ->capture_default_str();
  eval->add_option("--classes", e_classes, "Class count")->capture_default_str();
  eval->add_option("--dropout", e_dropout, "Dropout rate used at training time")
      ->capture_default_str();
  eval->add_flag("--no-dense-relu", e_no_dense_relu,
                 "Match a training run without the dense ReLU");
  eval->add_flag("--both-orders", e_both_orders, "Match a --both-orders training run");
  eval->add_flag("--improvised-only", e_improvised,
                 "Keep only improvised manifest entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (extract->parsed()) {
      return cmd_extract(gather_inputs(ex_files, ex_manifest, ex_input_dir, ex_improvised),
                         ex_out, ex_kind, ex_flags, ex_jobs, ex_csv);
    }
    if (gci->parsed()) {
      return cmd_gci(gather_inputs(gci_files, gci_manifest, gci_input_dir, false),
                     gci_out, gci_seconds, gci_flags, gci_jobs);
    }
    if (render->parsed()) {
      return cmd_render(gather_inputs(r_files, r_manifest, r_input_dir, false), r_out,
                        r_kind, r_flags, r_csv);
    }
    if (scan->parsed()) {
      return cmd_scan(s_manifest, s_flags, s_improvised);
    }
    if (train->parsed()) {
      t_config.select_on_uwa = t_select_uwa;
      return cmd_train(t_manifest, t_features, t_kind, t_out, t_blocks, t_dense,
                       t_classes, t_dropout, t_no_dense_relu, t_config, t_both_orders,
                       t_improvised, t_fold);
    }
    if (eval->parsed()) {
      if (e_predictions.empty() &&
          (e_manifest.empty() || e_features.empty() || e_checkpoints.empty())) {
        std::cerr << "evaluate needs either --predictions or all of --manifest, "
                     "--features, --checkpoints\n";
        return kExitUsage;
      }
      return cmd_evaluate(e_manifest, e_features, e_kind, e_checkpoints, e_predictions,
                          e_out, e_both_orders, e_improvised, e_blocks, e_dense,
                          e_classes, e_dropout, e_no_dense_relu);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

// Copyright 2026 The sigmarec Authors.
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

// Mini-batch training with early stopping on validation Recall@20, an
// epoch-level metrics log and a binary checkpoint format.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigma/config.hpp"
#include "sigma/corpus.hpp"
#include "sigma/model.hpp"

namespace sigma::train {

struct EpochRecord {
  int epoch = 0;
  std::map<std::string, double> losses;  // means over training positions
  double val_recall = 0.0;
  double seconds = 0.0;
  bool improved = false;

  nlohmann::json to_json() const;
};

struct TrainState {
  int epoch = 0;
  double best_recall = -1.0;
  int best_epoch = -1;
  int since_best = 0;

  // Strict improvement resets the counter; returns whether it improved.
  bool observe(double recall, int epoch_index);
  bool exhausted(int patience) const { return since_best >= patience; }
};

struct TrainOptions {
  std::filesystem::path out_dir;  // checkpoint and metrics log; nothing written when empty
  std::uint64_t seed = 42;
  int validation_k = 20;
  std::ostream* progress = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::unique_ptr<SigmaModel> model;  // parameters of the best epoch
  std::vector<EpochRecord> history;
  TrainState state;
  std::filesystem::path checkpoint;
  bool stopped_early = false;
};

// Mean Recall@k of validation targets, conditioning on the training prefix.
double validation_recall(const SigmaModel& model, const corpus::Corpus& corpus, int k = 20);

// Throws ConfigError when the configuration does not fit the corpus.
TrainResult train(const TrainConfig& config, const corpus::Corpus& corpus, const TrainOptions& options);

// One epoch of updates; returns position-weighted mean loss parts.
std::map<std::string, double> train_epoch(SigmaModel& model, nn::Adam& adam, const corpus::Corpus& corpus,
                                          ad::Rng& rng, double kl_scale);

struct CheckpointInfo {
  TrainConfig config;
  int k = 0;
  int num_items = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string corpus_hash;
  std::string dataset;
  std::vector<std::string> item_ids;
  nlohmann::json curve = nlohmann::json::array();
};

void save_checkpoint(const SigmaModel& model, const corpus::Corpus& corpus, std::uint64_t seed,
                     const nlohmann::json& curve, const std::filesystem::path& path);
// Validates the container, the config hash and every tensor shape; throws
// DataError on any mismatch.
std::unique_ptr<SigmaModel> load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info = nullptr);

}  // namespace sigma::train

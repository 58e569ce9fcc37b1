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

// Experiment configuration. Every field has a default; JSON input may only
// name known keys. Dotted `section.key=value` overrides are applied on top.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sigma {

struct DatasetConfig {
  std::string name = "dataset";
  std::string path;                         // raw interaction log
  std::string type = "amazon";              // "amazon" or "movielens"
  std::optional<double> positive_threshold; // unset: 4 for movielens, none for amazon
  int min_count = 5;
  std::string corpus;                       // prepared artifact; derived when empty

  std::optional<double> effective_threshold() const;
};

struct TrainConfig {
  std::string variant = "full";  // full, uni_prior, no_orth, mie_only
  double uni_lambda = 1e-4;      // KL weight of the uni_prior variant
  int k = 0;                     // 0: 4 for amazon, 8 for movielens
  double lambda = 1e-4;
  double beta1 = 1e-2;
  double beta2 = 1e-2;
  double lr = 1e-3;
  double dropout = 0.3;
  int dim = 128;
  int max_len = 100;
  int heads = 4;
  int blocks = 2;
  int patience = 100;
  int max_epochs = 1000;
  int batch_size = 256;
  int eval_batch_size = 256;
  double tau_dec = 1.0;
  double tau_cat = 0.1;
  double eps_score = 1.0;
  double gumbel_temperature = 0.5;
  bool straight_through = true;
  bool detach_prior = false;
  bool orth_abs = false;
  int kl_warmup_epochs = 0;  // linear ramp of lambda; 0 disables
  int retrieve_per_interest = 40;

  // Throws ConfigError on out-of-range values.
  void validate() const;
  int resolved_k(const std::string& dataset_type) const;
};

struct EvalConfig {
  std::vector<int> k_list{20, 40};
  std::string diversity_map;
  std::string checkpoint;  // derived from the output directory when empty
};

struct AblationConfig {
  std::vector<std::string> variants{"full", "uni_prior(0.0001)", "uni_prior(1)", "no_orth", "mie_only"};
  std::vector<double> lambda_grid{0.01, 0.001, 0.0001};
  std::vector<int> k_grid{2, 4, 8, 16};
};

struct ExperimentConfig {
  DatasetConfig dataset;
  TrainConfig train;
  EvalConfig eval;
  AblationConfig ablation;
  std::string output_dir = "runs";
  std::uint64_t seed = 42;
  std::vector<std::uint64_t> seeds{42};

  void validate() const;
  // Paths after applying SIGMA_DATA_DIR / SIGMA_CACHE_DIR to relative entries.
  std::filesystem::path data_path() const;
  std::filesystem::path corpus_path() const;
  std::filesystem::path checkpoint_path() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
// Strict: unknown keys and wrongly typed values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// `key` is a dotted path such as "train.k"; `value` is parsed as JSON when
// possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& key, const std::string& value);
// Parses "key=value".
void apply_override(nlohmann::json& config, const std::string& assignment);

// Stable hash of the training section, carried by checkpoints.
std::string config_hash(const TrainConfig& c);

}  // namespace sigma

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

// Full-catalog leave-one-out evaluation and the ablation harness.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigma/config.hpp"
#include "sigma/corpus.hpp"
#include "sigma/metrics.hpp"
#include "sigma/model.hpp"

namespace sigma::eval {

struct MetricRow {
  std::string dataset;
  std::string variant;
  double lambda = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  std::string metric;  // recall, ndcg, diversity
  int K = 0;
  double value = 0.0;

  nlohmann::json to_json() const;
};

struct RowLabels {
  std::string dataset;
  std::string variant;
  double lambda = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
};

enum class Stage { kValidation, kTest };

// Recall and NDCG for every K (plus Diversity when categories are given),
// averaged over all users of the corpus.
std::vector<MetricRow> evaluate(const SigmaModel& model, const corpus::Corpus& corpus, const std::vector<int>& ks,
                                const CategoryMap* categories, const RowLabels& labels,
                                Stage stage = Stage::kTest);

// Same, from precomputed rankings (one per split, in corpus order).
std::vector<MetricRow> evaluate_lists(const std::vector<RankedList>& lists, const corpus::Corpus& corpus,
                                      const std::vector<int>& ks, const CategoryMap* categories,
                                      const RowLabels& labels, Stage stage = Stage::kTest);

double metric_value(const std::vector<MetricRow>& rows, const std::string& metric, int K);

std::string format_table(const std::vector<MetricRow>& rows);
void write_jsonl(const std::vector<MetricRow>& rows, const std::filesystem::path& path);

struct AblationCell {
  std::string variant;  // as accepted by build_variant
  double lambda = 0.0;  // KL weight of the cell
  int k = 0;
  std::uint64_t seed = 0;
  std::string group;  // "variant", "lambda" or "k"
};

struct CellFailure {
  AblationCell cell;
  std::string message;
};

struct AblationReport {
  std::vector<MetricRow> rows;
  std::vector<CellFailure> failures;
};

// Variant cells, a lambda sweep of the full model and a category-count sweep,
// each repeated over the seed list. Identical cells appear once.
std::vector<AblationCell> ablation_cells(const ExperimentConfig& config, const std::string& dataset_type);

using CellRunner = std::function<std::vector<MetricRow>(const AblationCell&, const TrainConfig&)>;

// Trains and evaluates every cell; a failing cell is recorded and skipped.
AblationReport ablation_suite(const ExperimentConfig& config, const corpus::Corpus& corpus,
                              const CategoryMap* categories, std::ostream* progress = nullptr,
                              CellRunner runner = nullptr);

// Accuracy/diversity pairs of the full model at category count k, one line
// per lambda in descending order, averaged over seeds.
std::string format_lambda_sweep(const std::vector<MetricRow>& rows, int K, int k);

}  // namespace sigma::eval

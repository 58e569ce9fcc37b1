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

#include "sigma/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "sigma/errors.hpp"
#include "sigma/trainer.hpp"

namespace sigma::eval {

nlohmann::json MetricRow::to_json() const {
  return {{"dataset", dataset}, {"variant", variant}, {"lambda", lambda}, {"k", k},
          {"seed", seed},       {"metric", metric},   {"K", K},           {"value", value}};
}

std::vector<MetricRow> evaluate_lists(const std::vector<RankedList>& lists, const corpus::Corpus& corpus,
                                      const std::vector<int>& ks, const CategoryMap* categories,
                                      const RowLabels& labels, Stage stage) {
  if (lists.size() != corpus.splits.size()) throw DomainError("evaluate: one ranked list per user is required");
  std::vector<MetricRow> rows;
  auto row = [&](const std::string& metric, int K, double value) {
    rows.push_back(MetricRow{labels.dataset, labels.variant, labels.lambda, labels.k, labels.seed, metric, K, value});
  };
  const double users = static_cast<double>(std::max<size_t>(1, lists.size()));
  for (int K : ks) {
    double recall = 0.0, ndcg = 0.0;
    for (size_t i = 0; i < lists.size(); ++i) {
      const auto& s = corpus.splits[i];
      const int target = stage == Stage::kTest ? s.test_target : s.val_target;
      recall += recall_at_k(lists[i], target, K, corpus.num_items());
      ndcg += ndcg_at_k(lists[i], target, K, corpus.num_items());
    }
    row("recall", K, recall / users);
    row("ndcg", K, ndcg / users);
    if (categories && K >= 2) row("diversity", K, diversity_at_k(lists, *categories, K));
  }
  return rows;
}

std::vector<MetricRow> evaluate(const SigmaModel& model, const corpus::Corpus& corpus, const std::vector<int>& ks,
                                const CategoryMap* categories, const RowLabels& labels, Stage stage) {
  if (ks.empty()) throw DomainError("evaluate: empty K list");
  if (model.num_items() != corpus.num_items()) throw DataError("model and corpus disagree on the catalog size");
  std::vector<std::vector<int>> histories;
  histories.reserve(corpus.splits.size());
  for (const auto& s : corpus.splits) {
    histories.push_back(stage == Stage::kTest ? s.test_history() : s.train.items);
  }
  const int max_k = *std::max_element(ks.begin(), ks.end());
  return evaluate_lists(model.recommend(histories, max_k), corpus, ks, categories, labels, stage);
}

double metric_value(const std::vector<MetricRow>& rows, const std::string& metric, int K) {
  for (const auto& r : rows) {
    if (r.metric == metric && r.K == K) return r.value;
  }
  throw DomainError("no " + metric + "@" + std::to_string(K) + " row");
}

std::string format_table(const std::vector<MetricRow>& rows) {
  using Key = std::tuple<std::string, std::string, double, int, std::uint64_t>;
  std::vector<Key> keys;
  std::map<Key, std::map<std::string, double>> cells;
  std::vector<std::string> columns;
  for (const auto& r : rows) {
    Key key{r.dataset, r.variant, r.lambda, r.k, r.seed};
    if (!cells.count(key)) keys.push_back(key);
    const std::string col = r.metric + "@" + std::to_string(r.K);
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    cells[key][col] = r.value;
  }
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s %-20s %-8s %-4s %-8s", "dataset", "variant", "lambda", "k", "seed");
  out << buf;
  for (const auto& c : columns) {
    std::snprintf(buf, sizeof buf, " %13s", c.c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& key : keys) {
    const auto& [dataset, variant, lambda, k, seed] = key;
    std::snprintf(buf, sizeof buf, "%-12s %-20s %-8g %-4d %-8llu", dataset.c_str(), variant.c_str(), lambda, k,
                  static_cast<unsigned long long>(seed));
    out << buf;
    for (const auto& c : columns) {
      auto it = cells[key].find(c);
      if (it == cells[key].end()) {
        std::snprintf(buf, sizeof buf, " %13s", "-");
      } else {
        std::snprintf(buf, sizeof buf, " %13.4f", it->second);
      }
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

void write_jsonl(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : rows) out << r.to_json().dump() << '\n';
}

std::vector<AblationCell> ablation_cells(const ExperimentConfig& config, const std::string& dataset_type) {
  const int default_k = config.train.resolved_k(dataset_type);
  std::vector<AblationCell> cells;
  std::set<std::tuple<std::string, double, int, std::uint64_t>> seen;
  auto add = [&](const std::string& variant, double lambda, int k, std::uint64_t seed, const char* group) {
    const std::string label = parse_variant(variant).label();
    if (seen.insert({label, lambda, k, seed}).second) cells.push_back(AblationCell{variant, lambda, k, seed, group});
  };
  for (std::uint64_t seed : config.seeds) {
    for (const auto& v : config.ablation.variants) {
      VariantSpec spec = parse_variant(v);
      const double lambda = spec.variant == Variant::kUniPrior
                                ? (v == "uni_prior" ? config.train.uni_lambda : spec.uni_lambda)
                                : config.train.lambda;
      add(v, lambda, default_k, seed, "variant");
    }
    for (double l : config.ablation.lambda_grid) add("full", l, default_k, seed, "lambda");
    for (int k : config.ablation.k_grid) add("full", config.train.lambda, k, seed, "k");
  }
  return cells;
}

namespace {

std::string cell_dir_name(const AblationCell& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_l%g_k%d_s%llu", c.group.c_str(), parse_variant(c.variant).label().c_str(),
                c.lambda, c.k, static_cast<unsigned long long>(c.seed));
  return buf;
}

}  // namespace

AblationReport ablation_suite(const ExperimentConfig& config, const corpus::Corpus& corpus,
                              const CategoryMap* categories, std::ostream* progress, CellRunner runner) {
  if (!runner) {
    runner = [&](const AblationCell& cell, const TrainConfig& cfg) {
      train::TrainOptions opts;
      opts.out_dir = std::filesystem::path(config.output_dir) / "ablation" / cell_dir_name(cell);
      opts.seed = cell.seed;
      auto result = train::train(cfg, corpus, opts);
      RowLabels labels{corpus.name, parse_variant(cell.variant).label(), cell.lambda, cell.k, cell.seed};
      return evaluate(*result.model, corpus, config.eval.k_list, categories, labels);
    };
  }
  AblationReport report;
  for (const auto& cell : ablation_cells(config, corpus.type)) {
    try {
      TrainConfig cfg = build_variant(cell.variant, config.train);
      if (parse_variant(cell.variant).variant == Variant::kUniPrior) {
        cfg.uni_lambda = cell.lambda;
      } else {
        cfg.lambda = cell.lambda;
      }
      cfg.k = cell.k;
      if (progress) *progress << "cell " << cell_dir_name(cell) << '\n';
      auto rows = runner(cell, cfg);
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    } catch (const std::exception& e) {
      report.failures.push_back(CellFailure{cell, e.what()});
      if (progress) *progress << "cell " << cell_dir_name(cell) << " failed: " << e.what() << '\n';
    }
  }
  return report;
}

std::string format_lambda_sweep(const std::vector<MetricRow>& rows, int K, int k) {
  std::map<double, std::map<std::string, std::pair<double, int>>, std::greater<>> table;
  for (const auto& r : rows) {
    if (r.variant != "full" || r.k != k || r.K != K) continue;
    auto& cell = table[r.lambda][r.metric];
    cell.first += r.value;
    cell.second += 1;
  }
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %12s %12s %12s\n", "lambda", ("Recall@" + std::to_string(K)).c_str(),
                ("NDCG@" + std::to_string(K)).c_str(), ("Diversity@" + std::to_string(K)).c_str());
  out << buf;
  for (const auto& [lambda, metrics] : table) {
    auto mean = [&](const std::string& m) {
      auto it = metrics.find(m);
      return it == metrics.end() ? std::string("-") : std::to_string(it->second.first / it->second.second);
    };
    std::snprintf(buf, sizeof buf, "%-10g %12s %12s %12s\n", lambda, mean("recall").c_str(), mean("ndcg").c_str(),
                  mean("diversity").c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace sigma::eval

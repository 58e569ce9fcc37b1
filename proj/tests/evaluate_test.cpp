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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "sigma/errors.hpp"
#include "support/testing.hpp"

namespace sigma::eval {
namespace {

RankedList list_of(std::vector<int> items) {
  RankedList r;
  r.items = std::move(items);
  for (size_t i = 0; i < r.items.size(); ++i) r.scores.push_back(-static_cast<double>(i));
  return r;
}

// Ranking that places `target` at 1-based position `rank` among items 1..n.
RankedList with_target_at(int target, int rank, int n) {
  std::vector<int> others;
  for (int i = 1; i <= n; ++i) {
    if (i != target) others.push_back(i);
  }
  others.insert(others.begin() + (rank - 1), target);
  return list_of(others);
}

corpus::Corpus toy_corpus(int items, const std::vector<std::pair<int, int>>& val_test) {
  corpus::Corpus c;
  c.name = "toy";
  c.type = "amazon";
  c.item_ids.push_back("<pad>");
  for (int i = 1; i <= items; ++i) c.item_ids.push_back("i" + std::to_string(i));
  for (size_t u = 0; u < val_test.size(); ++u) {
    corpus::Split s;
    s.train.user = static_cast<int>(u);
    s.train.items = {1, 2};
    s.val_target = val_test[u].first;
    s.test_target = val_test[u].second;
    c.splits.push_back(s);
    c.user_ids.push_back("u" + std::to_string(u));
  }
  return c;
}

TEST(TopKTest, OrderingTiesAndClipping) {
  Eigen::VectorXd s(5);
  s << 0.5, 2.0, 0.5, -1.0, 2.0;
  RankedList r = top_k(s, 4);
  EXPECT_EQ(r.items, (std::vector<int>{2, 5, 1, 3}));
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(top_k(s, 10).size(), 5);
  EXPECT_EQ(top_k(s, 2, 0).items, (std::vector<int>{1, 4}));
  EXPECT_EQ(r.rank_of(1), 3);
  EXPECT_EQ(r.rank_of(4), 0);
}

TEST(RankedListTest, ValidateRejectsMalformedLists) {
  RankedList dup = list_of({1, 2, 1});
  EXPECT_THROW(dup.validate(), DomainError);
  RankedList unsorted = list_of({1, 2});
  unsorted.scores = {0.0, 1.0};
  EXPECT_THROW(unsorted.validate(), DomainError);
  RankedList mismatch = list_of({1, 2});
  mismatch.scores.pop_back();
  EXPECT_THROW(mismatch.validate(), DomainError);
}

TEST(RecallTest, Examples) {
  EXPECT_EQ(recall_at_k(with_target_at(7, 1, 50), 7, 20, 50), 1.0);
  RankedList r21 = with_target_at(7, 21, 50);
  EXPECT_EQ(recall_at_k(r21, 7, 20, 50), 0.0);
  EXPECT_EQ(recall_at_k(r21, 7, 40, 50), 1.0);
  EXPECT_THROW(recall_at_k(r21, 0, 20, 50), EvaluationError);
  EXPECT_THROW(recall_at_k(r21, 51, 20, 50), EvaluationError);
}

TEST(NdcgTest, Examples) {
  EXPECT_EQ(ndcg_at_k(with_target_at(3, 1, 10), 3, 20, 10), 1.0);
  const double rank2 = ndcg_at_k(with_target_at(3, 2, 10), 3, 20, 10);
  EXPECT_NEAR(rank2, 1.0 / std::log2(3.0), 1e-12);
  EXPECT_NEAR(rank2, 0.6309, 5e-5);
  EXPECT_EQ(ndcg_at_k(with_target_at(3, 21, 30), 3, 20, 30), 0.0);
  EXPECT_THROW(ndcg_at_k(with_target_at(3, 1, 10), 11, 20, 10), EvaluationError);
  for (int rank = 1; rank <= 5; ++rank) {
    RankedList r = with_target_at(4, rank, 10);
    EXPECT_EQ(ndcg_at_k(r, 4, 1, 10), recall_at_k(r, 4, 1, 10));
  }
}

TEST(MetricsTest, MonotoneInK) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int target = 1 + static_cast<int>(rng() % 60);
    RankedList r = with_target_at(target, 1 + static_cast<int>(rng() % 60), 60);
    for (int k = 1; k < 60; ++k) {
      EXPECT_LE(recall_at_k(r, target, k, 60), recall_at_k(r, target, k + 1, 60));
      EXPECT_LE(ndcg_at_k(r, target, k, 60), ndcg_at_k(r, target, k + 1, 60));
    }
  }
}

TEST(MetricsTest, RandomRankerMatchesBinomialBound) {
  const int n = 1000, users = 5000;
  std::mt19937_64 rng(11);
  std::vector<int> items(n);
  std::iota(items.begin(), items.end(), 1);
  double hits = 0.0;
  for (int u = 0; u < users; ++u) {
    std::shuffle(items.begin(), items.end(), rng);
    const int target = 1 + static_cast<int>(rng() % n);
    hits += recall_at_k(list_of(items), target, 20, n);
  }
  const double mean = hits / users;
  EXPECT_GE(mean, 0.015);
  EXPECT_LE(mean, 0.025);
}

class DiversityTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const int drama = map.intern("drama"), comedy = map.intern("comedy"), horror = map.intern("horror");
    map.set(1, {drama});
    map.set(2, {drama, comedy});
    map.set(3, {drama});
    map.set(4, {comedy});
    map.set(5, {horror});
  }
  CategoryMap map;
};

TEST_F(DiversityTest, Examples) {
  EXPECT_EQ(diversity_at_k({list_of({1, 2, 3})}, map, 3), 0.0);
  EXPECT_EQ(diversity_at_k({list_of({1, 4, 5})}, map, 3), 1.0);
  EXPECT_DOUBLE_EQ(diversity_at_k({list_of({1, 3, 4})}, map, 3), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(diversity_at_k({list_of({1, 2, 3}), list_of({1, 4, 5})}, map, 3), 0.5);
}

TEST_F(DiversityTest, PermutationInvariantAndBounded) {
  std::vector<int> items{1, 2, 3, 4, 5};
  const double base = diversity_at_k({list_of(items)}, map, 5);
  std::sort(items.begin(), items.end());
  do {
    const double d = diversity_at_k({list_of(items)}, map, 5);
    EXPECT_DOUBLE_EQ(d, base);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  } while (std::next_permutation(items.begin(), items.end()));
}

TEST_F(DiversityTest, Errors) {
  EXPECT_THROW(diversity_at_k({list_of({1, 2})}, map, 1), DomainError);
  try {
    diversity_at_k({list_of({1, 9, 8})}, map, 3);
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find('9'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('8'), std::string::npos);
  }
}

TEST(CategoryMapTest, LoadsTabCommaAndDoubleColonFormats) {
  corpus::Corpus c = toy_corpus(4, {{1, 2}});
  const auto path = std::filesystem::temp_directory_path() / "sigma_categories.txt";
  {
    std::ofstream out(path);
    out << "i1\tdrama|comedy\n"
        << "i2,drama\n"
        << "i3::Some Title (1999)::horror\n"
        << "unknown\tdrama\n";
  }
  CategoryMap m = load_category_map(path, c);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_TRUE(m.same_category(1, 2));
  EXPECT_FALSE(m.same_category(2, 3));
  EXPECT_FALSE(m.contains(4));
  {
    std::ofstream out(path);
    out << "i1\n";
  }
  EXPECT_THROW(load_category_map(path, c), ParseError);
  std::filesystem::remove(path);
}

TEST(EvaluateListsTest, OracleRankerAndStages) {
  corpus::Corpus c = toy_corpus(30, {{3, 4}, {10, 11}, {29, 30}});
  std::vector<RankedList> test_oracle, val_oracle;
  for (const auto& s : c.splits) {
    test_oracle.push_back(with_target_at(s.test_target, 1, 30));
    val_oracle.push_back(with_target_at(s.val_target, 1, 30));
  }
  RowLabels labels{"toy", "full", 1e-4, 4, 42};
  for (const auto& r : evaluate_lists(test_oracle, c, {1, 20, 40}, nullptr, labels)) EXPECT_EQ(r.value, 1.0);
  for (const auto& r : evaluate_lists(val_oracle, c, {20}, nullptr, labels, Stage::kValidation)) {
    EXPECT_EQ(r.value, 1.0);
  }
  auto rows = evaluate_lists(val_oracle, c, {1}, nullptr, labels);
  EXPECT_EQ(metric_value(rows, "recall", 1), 0.0);
  EXPECT_THROW(metric_value(rows, "recall", 40), DomainError);
  EXPECT_THROW(evaluate_lists({}, c, {20}, nullptr, labels), DomainError);
}

TEST(EvaluateListsTest, MeanOverUsersAndTableFormat) {
  corpus::Corpus c = toy_corpus(50, {{1, 5}, {1, 6}});
  std::vector<RankedList> lists{with_target_at(5, 2, 50), with_target_at(6, 30, 50)};
  auto rows = evaluate_lists(lists, c, {20, 40}, nullptr, RowLabels{"toy", "full", 1e-4, 4, 7});
  EXPECT_DOUBLE_EQ(metric_value(rows, "recall", 20), 0.5);
  EXPECT_DOUBLE_EQ(metric_value(rows, "recall", 40), 1.0);
  EXPECT_NEAR(metric_value(rows, "ndcg", 20), 0.5 / std::log2(3.0), 1e-12);
  EXPECT_NEAR(metric_value(rows, "ndcg", 40), 0.5 / std::log2(3.0) + 0.5 / std::log2(31.0), 1e-12);
  const std::string table = format_table(rows);
  EXPECT_NE(table.find("recall@20"), std::string::npos);
  EXPECT_NE(table.find("ndcg@40"), std::string::npos);
  EXPECT_NE(table.find("0.5000"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "sigma_eval_rows.jsonl";
  write_jsonl(rows, path);
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("dataset"), "toy");
    EXPECT_EQ(j.at("seed"), 7);
    ++n;
  }
  EXPECT_EQ(n, 4);
  std::filesystem::remove(path);
}

TEST(EvaluateTest, DeterministicAndMonotone) {
  corpus::Corpus c = testing::synthetic_corpus();
  CategoryMap cats = testing::synthetic_categories(c);
  TrainConfig cfg = testing::tiny_config();
  SigmaModel model(cfg, 2, c.num_items(), 5);
  RowLabels labels{c.name, "full", cfg.lambda, 2, 5};
  auto a = evaluate(model, c, {20, 40}, &cats, labels);
  auto b = evaluate(model, c, {20, 40}, &cats, labels);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value) << a[i].metric;
  EXPECT_LE(metric_value(a, "recall", 20), metric_value(a, "recall", 40));
  EXPECT_LE(metric_value(a, "ndcg", 20), metric_value(a, "ndcg", 40));
  const double d = metric_value(a, "diversity", 20);
  EXPECT_GE(d, 0.0);
  EXPECT_LE(d, 1.0);

  SigmaModel other(cfg, 2, c.num_items() - 1, 5);
  EXPECT_THROW(evaluate(other, c, {20}, nullptr, labels), DataError);
  EXPECT_THROW(evaluate(model, c, {}, nullptr, labels), DomainError);
}

TEST(AblationTest, CellsCoverVariantsLambdaGridAndCategorySweep) {
  ExperimentConfig cfg;
  cfg.seeds = {1, 2};
  auto cells = ablation_cells(cfg, "amazon");
  std::set<int> ks;
  std::set<double> lambdas;
  std::set<std::string> variants;
  for (const auto& c : cells) {
    if (c.group == "k") ks.insert(c.k);
    if (c.group == "lambda") lambdas.insert(c.lambda);
    variants.insert(parse_variant(c.variant).label());
  }
  EXPECT_EQ(ks, (std::set<int>{2, 8, 16}));
  std::set<int> all_k;
  for (const auto& c : cells) {
    if (parse_variant(c.variant).variant == Variant::kFull && c.lambda == cfg.train.lambda) all_k.insert(c.k);
  }
  EXPECT_EQ(all_k, (std::set<int>{2, 4, 8, 16}));
  EXPECT_EQ(lambdas, (std::set<double>{0.01, 0.001}));
  EXPECT_EQ(variants, (std::set<std::string>{"full", "uni_prior(0.0001)", "uni_prior(1)", "no_orth", "mie_only"}));
  std::set<std::tuple<std::string, double, int, std::uint64_t>> unique;
  for (const auto& c : cells) unique.insert({parse_variant(c.variant).label(), c.lambda, c.k, c.seed});
  EXPECT_EQ(unique.size(), cells.size());
  EXPECT_EQ(cells.size(), 2u * (5 + 2 + 3));
}

TEST(AblationTest, FailingCellIsRecordedAndSuiteContinues) {
  ExperimentConfig cfg;
  cfg.seeds = {3};
  corpus::Corpus c = toy_corpus(10, {{1, 2}});
  int calls = 0;
  std::ostringstream progress;
  auto report = ablation_suite(cfg, c, nullptr, &progress, [&](const AblationCell& cell, const TrainConfig& t) {
    ++calls;
    if (cell.k == 8) throw NumericError("diverged");
    EXPECT_EQ(t.k, cell.k);
    if (parse_variant(cell.variant).variant == Variant::kUniPrior) {
      EXPECT_EQ(t.uni_lambda, cell.lambda);
    } else {
      EXPECT_EQ(t.lambda, cell.lambda);
    }
    MetricRow row{c.name, parse_variant(cell.variant).label(), cell.lambda, cell.k, cell.seed, "recall", 20, 0.1};
    return std::vector<MetricRow>{row};
  });
  const auto cells = ablation_cells(cfg, c.type);
  EXPECT_EQ(calls, static_cast<int>(cells.size()));
  ASSERT_EQ(report.failures.size(), 1u);
  EXPECT_EQ(report.failures[0].cell.k, 8);
  EXPECT_EQ(report.failures[0].message, "diverged");
  EXPECT_EQ(report.rows.size(), cells.size() - 1);
  EXPECT_NE(progress.str().find("failed: diverged"), std::string::npos);
  bool full = false, uni1 = false;
  for (const auto& r : report.rows) {
    full = full || r.variant == "full";
    uni1 = uni1 || r.variant == "uni_prior(1)";
  }
  EXPECT_TRUE(full);
  EXPECT_TRUE(uni1);
}

TEST(AblationTest, RealCellsOnSyntheticCorpusShareSplits) {
  ExperimentConfig cfg;
  cfg.train = testing::tiny_config();
  cfg.train.max_epochs = 1;
  cfg.seeds = {1};
  cfg.ablation.variants = {"full", "uni_prior(1)"};
  cfg.ablation.lambda_grid = {};
  cfg.ablation.k_grid = {};
  cfg.output_dir = (std::filesystem::temp_directory_path() / "sigma_ablation").string();
  corpus::Corpus c = testing::synthetic_corpus();
  auto report = ablation_suite(cfg, c, nullptr);
  EXPECT_TRUE(report.failures.empty());
  std::set<std::string> variants;
  for (const auto& r : report.rows) variants.insert(r.variant);
  EXPECT_EQ(variants, (std::set<std::string>{"full", "uni_prior(1)"}));
  std::filesystem::remove_all(cfg.output_dir);
}

TEST(AblationTest, LambdaSweepTable) {
  std::vector<MetricRow> rows;
  for (double l : {0.0001, 0.01, 0.001}) {
    for (std::uint64_t seed : {1, 2}) {
      rows.push_back({"d", "full", l, 4, seed, "recall", 20, 0.1 * seed});
      rows.push_back({"d", "full", l, 4, seed, "ndcg", 20, 0.05});
      rows.push_back({"d", "full", l, 4, seed, "diversity", 20, l * 10});
    }
  }
  rows.push_back({"d", "no_orth", 0.5, 4, 1, "recall", 20, 0.9});
  rows.push_back({"d", "full", 0.5, 8, 1, "recall", 20, 0.9});
  const std::string t = format_lambda_sweep(rows, 20, 4);
  std::istringstream in(t);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_NE(lines[0].find("Recall@20"), std::string::npos);
  EXPECT_NE(lines[0].find("NDCG@20"), std::string::npos);
  EXPECT_NE(lines[0].find("Diversity@20"), std::string::npos);
  EXPECT_EQ(lines[1].rfind("0.01 ", 0), 0u);
  EXPECT_EQ(lines[2].rfind("0.001 ", 0), 0u);
  EXPECT_EQ(lines[3].rfind("0.0001 ", 0), 0u);
  EXPECT_NE(lines[1].find("0.150000"), std::string::npos);
  EXPECT_NE(lines[1].find("0.100000"), std::string::npos);
  EXPECT_EQ(t.find("0.5 "), std::string::npos);
}

}  // namespace
}  // namespace sigma::eval

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

#include "sigma/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sigma/errors.hpp"

namespace sigma {
namespace {

using nlohmann::json;

TEST(ConfigTest, DefaultsRoundTrip) {
  ExperimentConfig c = config_from_json(json::object());
  EXPECT_EQ(c.train.variant, "full");
  EXPECT_EQ(c.train.dim, 128);
  EXPECT_EQ(c.train.heads, 4);
  EXPECT_EQ(c.eval.k_list, (std::vector<int>{20, 40}));
  EXPECT_EQ(c.ablation.k_grid, (std::vector<int>{2, 4, 8, 16}));
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(ConfigTest, StrictKeysAndTypes) {
  EXPECT_THROW(config_from_json(json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"train", {{"kk", 2}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"train", {{"k", "eight"}}}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"train", 3}}), ConfigError);
  ExperimentConfig c = config_from_json(json{{"train", {{"k", 8}, {"lr", 0.01}}}, {"dataset", {{"type", "movielens"}}}});
  EXPECT_EQ(c.train.k, 8);
  EXPECT_EQ(c.train.lr, 0.01);
  EXPECT_EQ(c.train.dim, 128);
}

TEST(ConfigTest, ValidationRejectsOutOfRangeValues) {
  for (const json& bad : {json{{"train", {{"lr", 0.0}}}}, json{{"train", {{"dim", 10}, {"heads", 4}}}},
                          json{{"train", {{"dropout", 1.0}}}}, json{{"train", {{"variant", "other"}}}},
                          json{{"train", {{"beta2", -1.0}}}}, json{{"train", {{"tau_dec", 0.0}}}},
                          json{{"dataset", {{"type", "books"}}}}, json{{"eval", {{"k_list", json::array()}}}},
                          json{{"seeds", json::array()}}, json{{"ablation", {{"k_grid", {0}}}}}}) {
    EXPECT_THROW(config_from_json(bad), ConfigError) << bad.dump();
  }
}

TEST(ConfigTest, ThresholdAndCategoryDefaults) {
  ExperimentConfig ml = config_from_json(json{{"dataset", {{"type", "movielens"}}}});
  EXPECT_EQ(ml.dataset.effective_threshold(), 4.0);
  EXPECT_EQ(ml.train.resolved_k("movielens"), 8);
  ExperimentConfig amazon = config_from_json(json::object());
  EXPECT_FALSE(amazon.dataset.effective_threshold().has_value());
  EXPECT_EQ(amazon.train.resolved_k("amazon"), 4);
  ExperimentConfig custom = config_from_json(json{{"dataset", {{"positive_threshold", 3.5}}}, {"train", {{"k", 16}}}});
  EXPECT_EQ(custom.dataset.effective_threshold(), 3.5);
  EXPECT_EQ(custom.train.resolved_k("amazon"), 16);
}

TEST(ConfigTest, Overrides) {
  json j = to_json(ExperimentConfig{});
  apply_override(j, "train.k=8");
  apply_override(j, "train.variant=uni_prior");
  apply_override(j, "dataset.name", "office");
  apply_override(j, "eval.k_list=[10,50]");
  apply_override(j, "train.detach_prior=true");
  ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.train.k, 8);
  EXPECT_EQ(c.train.variant, "uni_prior");
  EXPECT_EQ(c.dataset.name, "office");
  EXPECT_EQ(c.eval.k_list, (std::vector<int>{10, 50}));
  EXPECT_TRUE(c.train.detach_prior);
  EXPECT_THROW(apply_override(j, "train.nope=1"), ConfigError);
  EXPECT_THROW(apply_override(j, "train=1"), ConfigError);
  EXPECT_THROW(apply_override(j, "train.k"), ConfigError);
  EXPECT_THROW(apply_override(j, "=3"), ConfigError);
  EXPECT_THROW(apply_override(j, "train..k=3"), ConfigError);
  apply_override(j, "train.k=abc");
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(ConfigTest, LoadConfigFile) {
  const auto path = std::filesystem::temp_directory_path() / "sigma_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"train": {"k": 2, "max_epochs": 5}, "seeds": [1, 2, 3]})";
  }
  ExperimentConfig c = load_config(path);
  EXPECT_EQ(c.train.k, 2);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(load_config(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(ConfigTest, HashTracksTrainSection) {
  TrainConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.k = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(train_config_from_json(to_json(b)).k, 8);
  EXPECT_EQ(config_hash(train_config_from_json(to_json(b))), config_hash(b));
}

TEST(ConfigTest, ArtifactPathsHonourEnvironment) {
  ExperimentConfig c;
  c.output_dir = "runs/x";
  c.dataset.name = "office";
  ::unsetenv("SIGMA_CACHE_DIR");
  ::unsetenv("SIGMA_DATA_DIR");
  EXPECT_EQ(c.corpus_path(), std::filesystem::path("runs/x/office.corpus.json"));
  EXPECT_EQ(c.checkpoint_path(), std::filesystem::path("runs/x/model.ckpt"));
  ::setenv("SIGMA_CACHE_DIR", "/cache", 1);
  ::setenv("SIGMA_DATA_DIR", "/data", 1);
  c.dataset.path = "office.csv";
  EXPECT_EQ(c.corpus_path(), std::filesystem::path("/cache/office.corpus.json"));
  EXPECT_EQ(c.data_path(), std::filesystem::path("/data/office.csv"));
  c.dataset.path = "/abs/office.csv";
  EXPECT_EQ(c.data_path(), std::filesystem::path("/abs/office.csv"));
  c.eval.checkpoint = "/tmp/m.ckpt";
  EXPECT_EQ(c.checkpoint_path(), std::filesystem::path("/tmp/m.ckpt"));
  ::unsetenv("SIGMA_CACHE_DIR");
  ::unsetenv("SIGMA_DATA_DIR");
}

}  // namespace
}  // namespace sigma

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

#include "sigma/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sigma/corpus.hpp"
#include "support/testing.hpp"

namespace sigma::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ::unsetenv("SIGMA_CACHE_DIR");
    ::unsetenv("SIGMA_DATA_DIR");
    dir = fs::temp_directory_path() /
          ("sigma_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }

  std::string out() const { return (dir / "run").string(); }

  fs::path dir;
};

constexpr const char* kToyLog =
    "user,item,rating,timestamp\n"
    "a,x,5,1\n"
    "a,y,4,2\n"
    "a,z,5,3\n"
    "b,x,3,1\n"
    "b,z,5,2\n"
    "b,w,5,3\n"
    "c,y,5,1\n"
    "c,w,2,2\n"
    "c,x,5,3\n";

TEST_F(CliTest, PrepareToyLogPrintsStatsColumns) {
  const std::string log = write("toy.csv", kToyLog);
  Result r = invoke({"prepare", "--input", log, "--dataset", "amazon", "--out", out(), "--set", "dataset.min_count=1",
                     "--set", "dataset.name=toy"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* col : {"#Users", "#Items", "#Interactions", "Avg. seq. len."}) {
    EXPECT_NE(r.out.find(col), std::string::npos) << col;
  }
  EXPECT_NE(r.out.find("toy"), std::string::npos);
  EXPECT_NE(r.out.find("3.0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "run" / "toy.corpus.json"));
  EXPECT_NE(r.out.find("effective config"), std::string::npos);
}

TEST_F(CliTest, OverrideIsEchoed) {
  Result r = invoke({"evaluate", "--out", out(), "--set", "train.k=8"});
  EXPECT_NE(r.out.find("\"k\": 8"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  Result unknown = invoke({"frobnicate"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("unknown subcommand"), std::string::npos);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"train", "--set", "train.nope=1"}).code, 2);
  EXPECT_EQ(invoke({"train", "--set", "train.lr=-1"}).code, 2);
  EXPECT_EQ(invoke({"train", "--device", "gpu"}).code, 2);
  EXPECT_EQ(invoke({"train", "--config", (dir / "missing.json").string()}).code, 2);
  EXPECT_EQ(invoke({"prepare", "--out", out()}).code, 2);

  Result no_corpus = invoke({"train", "--out", out()});
  EXPECT_EQ(no_corpus.code, 3);
  EXPECT_NE(no_corpus.err.find("prepare"), std::string::npos);
  EXPECT_EQ(invoke({"prepare", "--input", (dir / "missing.csv").string(), "--out", out()}).code, 3);

  const std::string log = write("toy.csv", kToyLog);
  EXPECT_EQ(invoke({"prepare", "--input", log, "--out", out()}).code, 3);
  EXPECT_EQ(invoke({"prepare", "--input", log, "--out", out(), "--set", "dataset.min_count=1"}).code, 0);
  Result no_ckpt = invoke({"evaluate", "--out", out()});
  EXPECT_EQ(no_ckpt.code, 3);
  EXPECT_NE(no_ckpt.err.find("checkpoint"), std::string::npos);

  Result ablate = invoke({"ablate", "--out", out(), "--set", "ablation.variants=[\"full\"]", "--set",
                          "ablation.lambda_grid=[]", "--set", "ablation.k_grid=[]"});
  EXPECT_EQ(ablate.code, 4) << ablate.err;
  EXPECT_NE(ablate.out.find("FAILED cell"), std::string::npos);

  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, EndToEndPipelineIsReproducible) {
  testing::SyntheticOptions opts;
  opts.users = 150;
  corpus::InteractionLog log = testing::synthetic_log(opts);
  std::ostringstream csv;
  for (const auto& rec : log.records) csv << rec.user << ',' << rec.item << ",5," << rec.timestamp << '\n';
  const std::string path = write("synthetic.csv", csv.str());
  const std::string config =
      write("config.json", R"({"dataset": {"name": "synthetic"},
        "train": {"dim": 8, "heads": 2, "blocks": 1, "max_len": 20, "batch_size": 64, "max_epochs": 2, "k": 2}})");

  ASSERT_EQ(invoke({"prepare", "--config", config, "--input", path, "--out", out()}).code, 0);
  Result trained = invoke({"train", "--config", config, "--out", out(), "--seed", "7"});
  ASSERT_EQ(trained.code, 0) << trained.err;
  EXPECT_NE(trained.out.find("epoch 1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "run" / "model.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run" / "metrics.jsonl"));

  Result first = invoke({"evaluate", "--config", config, "--out", out()});
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.out.find("recall@20"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "run" / "evaluation.jsonl"));
  Result second = invoke({"evaluate", "--config", config, "--out", out()});
  EXPECT_EQ(first.out, second.out);

  Result mismatch = invoke({"evaluate", "--config", config, "--out", out(), "--set", "train.k=4"});
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_EQ(invoke({"evaluate", "--config", config, "--out", out(), "--set", "train.k=4", "--force"}).code, 0);

  Result rec = invoke({"recommend", "--config", config, "--out", out(), "--user", "u3", "--k", "5"});
  ASSERT_EQ(rec.code, 0) << rec.err;
  EXPECT_NE(rec.out.find("rank\titem\tscore"), std::string::npos);
  EXPECT_NE(rec.out.find("\n5\t"), std::string::npos);
  EXPECT_EQ(invoke({"recommend", "--config", config, "--out", out(), "--user", "nobody"}).code, 3);
  EXPECT_EQ(invoke({"recommend", "--config", config, "--out", out()}).code, 2);

  const std::string other = (dir / "again").string();
  ASSERT_EQ(invoke({"prepare", "--config", config, "--input", path, "--out", other}).code, 0);
  ASSERT_EQ(invoke({"train", "--config", config, "--out", other, "--seed", "7"}).code, 0);
  Result again = invoke({"evaluate", "--config", config, "--out", other});
  auto table = [](const std::string& s) { return s.substr(s.find("dataset "), s.find("metrics written") - s.find("dataset ")); };
  EXPECT_EQ(table(again.out), table(first.out));
}

}  // namespace
}  // namespace sigma::cli

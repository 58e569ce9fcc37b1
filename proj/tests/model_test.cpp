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

#include "sigma/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "sigma/errors.hpp"
#include "sigma/nn.hpp"
#include "support/testing.hpp"

namespace sigma {
namespace {

using testing::tiny_config;

constexpr int kItems = 30;

PackedBatch batch_for(std::uint64_t seed, int rows = 12) {
  ad::Rng rng(seed);
  return testing::random_training_batch(rng, rows, 10, kItems);
}

LossParts loss_of(const TrainConfig& c, std::uint64_t init_seed = 3, std::uint64_t noise_seed = 4) {
  SigmaModel model(c, c.k, kItems, init_seed);
  ad::Rng noise(noise_seed);
  return model.joint_loss(batch_for(11), noise);
}

TEST(VariantTest, ParseAndLabels) {
  EXPECT_EQ(parse_variant("full").variant, Variant::kFull);
  EXPECT_EQ(parse_variant("no_orth").variant, Variant::kNoOrth);
  EXPECT_EQ(parse_variant("mie_only").variant, Variant::kMieOnly);
  VariantSpec u = parse_variant("uni_prior(1)");
  EXPECT_EQ(u.variant, Variant::kUniPrior);
  EXPECT_EQ(u.uni_lambda, 1.0);
  EXPECT_EQ(u.label(), "uni_prior(1)");
  EXPECT_EQ(parse_variant("uni_prior(0.0001)").label(), "uni_prior(0.0001)");
  EXPECT_EQ(parse_variant("uni_prior").uni_lambda, 1e-4);
  for (const char* bad : {"", "fulll", "uni_prior()", "uni_prior(-1)", "uni_prior(x)", "uni_prior(1"}) {
    EXPECT_THROW(parse_variant(bad), ConfigError) << bad;
  }
  EXPECT_EQ(build_variant("no_orth", tiny_config()).beta2, 0.0);
  EXPECT_EQ(build_variant("uni_prior(1)", tiny_config()).uni_lambda, 1.0);
}

TEST(JointLossTest, ZeroWeightsLeaveSequenceCrossEntropy) {
  TrainConfig c = tiny_config();
  c.beta1 = c.beta2 = c.lambda = 0.0;
  LossParts l = loss_of(c);
  EXPECT_NEAR(l.parts.at("total"), l.parts.at("sgm_recon"), 1e-12);
  EXPECT_GT(l.parts.at("mie_recon"), 0.0);
}

TEST(JointLossTest, HandSummedParts) {
  TrainConfig c = tiny_config();
  c.beta1 = 0.3;
  c.beta2 = 0.7;
  c.lambda = 0.05;
  LossParts l = loss_of(c);
  const auto& p = l.parts;
  const double sum = p.at("sgm_recon") + c.lambda * p.at("sgm_kl") +
                     c.beta1 * (p.at("mie_recon") + p.at("mie_kl")) + c.beta2 * p.at("orth");
  EXPECT_NEAR(l.total.item(), sum, 1e-6);
  EXPECT_EQ(l.total.item(), p.at("total"));
}

TEST(JointLossTest, DoublingOrthWeightDoublesItsContribution) {
  TrainConfig c = tiny_config();
  c.beta2 = 0.2;
  LossParts one = loss_of(c);
  c.beta2 = 0.4;
  LossParts two = loss_of(c);
  const double orth = one.parts.at("orth");
  EXPECT_EQ(orth, two.parts.at("orth"));
  EXPECT_NEAR(two.parts.at("total") - one.parts.at("total"), 0.2 * orth, 1e-9);
}

TEST(JointLossTest, NoOrthEqualsFullWithoutOrthWeight) {
  TrainConfig c = tiny_config();
  c.beta2 = 0.0;
  LossParts full = loss_of(c);
  TrainConfig n = tiny_config();
  n.variant = "no_orth";
  LossParts no_orth = loss_of(n);
  EXPECT_EQ(full.parts, no_orth.parts);
}

TEST(JointLossTest, MieOnlyHasNoSequenceModel) {
  TrainConfig c = tiny_config();
  c.variant = "mie_only";
  SigmaModel model(c, c.k, kItems, 3);
  EXPECT_FALSE(model.has_sgm());
  EXPECT_THROW(model.sgm(), DomainError);
  ad::Rng noise(4);
  LossParts l = model.joint_loss(batch_for(11), noise);
  EXPECT_EQ(l.parts.count("sgm_recon"), 0u);
  EXPECT_EQ(l.parts.count("sgm_kl"), 0u);
  EXPECT_NEAR(l.parts.at("total"), l.parts.at("mie_recon") + l.parts.at("mie_kl") + c.beta2 * l.parts.at("orth"),
              1e-9);
  for (const auto& [name, p] : model.parameters().items()) EXPECT_EQ(name.rfind("sgm.", 0), std::string::npos);
  auto lists = model.recommend({{1, 2, 3}, {4}}, 5);
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0].size(), 5);
}

TEST(JointLossTest, UniPriorUsesStandardNormalKl) {
  TrainConfig c = tiny_config();
  c.variant = "uni_prior";
  c.uni_lambda = 0.5;
  SigmaModel model(c, c.k, kItems, 3);
  EXPECT_FALSE(model.has_mie());
  ad::Rng noise(4);
  LossParts l = model.joint_loss(batch_for(11), noise);
  EXPECT_EQ(l.parts.count("mie_recon"), 0u);
  EXPECT_NEAR(l.parts.at("total"), l.parts.at("sgm_recon") + 0.5 * l.parts.at("sgm_kl"), 1e-9);
  EXPECT_GE(l.parts.at("sgm_kl"), 0.0);
}

TEST(JointLossTest, FinitePartsOverRandomInits) {
  TrainConfig c = tiny_config();
  PackedBatch b = batch_for(12);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SigmaModel model(c, c.k, kItems, seed);
    ad::Rng noise(seed + 1000);
    LossParts l = model.joint_loss(b, noise);
    for (const auto& [name, v] : l.parts) ASSERT_TRUE(std::isfinite(v)) << name << " seed " << seed;
  }
}

TEST(JointLossTest, OneStepDecreasesLoss) {
  TrainConfig c = tiny_config();
  c.lr = 1e-4;
  c.dropout = 0.0;
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SigmaModel model(c, c.k, kItems, seed);
    PackedBatch b = batch_for(seed + 500);
    nn::Adam adam(model.parameters(), nn::Adam::Options{c.lr});
    ad::Rng first(seed);
    LossParts before = model.joint_loss(b, first);
    model.parameters().zero_grad();
    ad::backward(before.total);
    adam.step();
    model.after_step();
    ad::Rng second(seed);
    if (model.joint_loss(b, second).total.item() < before.total.item()) ++decreased;
  }
  EXPECT_GE(decreased, 48);
}

TEST(JointLossTest, DetachPriorStopsMixtureGradients) {
  for (bool detach : {false, true}) {
    TrainConfig c = tiny_config();
    c.beta1 = c.beta2 = 0.0;
    c.lambda = 1.0;
    c.detach_prior = detach;
    SigmaModel model(c, c.k, kItems, 3);
    ad::Rng noise(4);
    LossParts l = model.joint_loss(batch_for(11), noise);
    model.parameters().zero_grad();
    ad::backward(l.total);
    double mie_grad = 0.0;
    for (const auto& [name, p] : model.parameters().items()) {
      if (name.rfind("mie.", 0) == 0 && p.node()->grad.size() > 0) mie_grad += p.grad().norm();
    }
    if (detach) {
      EXPECT_EQ(mie_grad, 0.0);
    } else {
      EXPECT_GT(mie_grad, 0.0);
    }
  }
}

TEST(JointLossTest, RejectsEmptyOrUntargetedBatches) {
  TrainConfig c = tiny_config();
  SigmaModel model(c, c.k, kItems, 3);
  ad::Rng noise(4);
  EXPECT_THROW(model.joint_loss(PackedBatch{}, noise), DomainError);
  PackedBatch h = pack(corpus::make_history_batch({{1, 2}}, 10));
  EXPECT_THROW(model.joint_loss(h, noise), DomainError);
}

TEST(ModelTest, ScoresAndRecommendAgree) {
  TrainConfig c = tiny_config();
  SigmaModel model(c, c.k, kItems, 3);
  std::vector<std::vector<int>> hs{{1, 5, 9}, {2}, {30, 29, 28, 27}};
  ad::Matrix s = model.scores(hs);
  ASSERT_EQ(s.rows(), 3);
  ASSERT_EQ(s.cols(), kItems);
  auto lists = model.recommend(hs, kItems);
  for (int u = 0; u < 3; ++u) {
    Eigen::Index best = 0;
    s.row(u).maxCoeff(&best);
    EXPECT_EQ(lists[u].items[0], best + 1);
    EXPECT_EQ(lists[u].size(), kItems);
  }
  EXPECT_EQ(model.recommend(hs, 10)[2].items, model.recommend(hs, 10)[2].items);
  EXPECT_THROW(model.scores({{}}), DomainError);
}

TEST(ModelTest, AfterStepKeepsPaddingRowAndUnitCategories) {
  TrainConfig c = tiny_config();
  SigmaModel model(c, c.k, kItems, 3);
  ad::Var(model.item_table()).mutable_value().row(0).setConstant(1.0);
  ad::Var(model.mie().bank().embeddings).mutable_value() *= 3.0;
  model.after_step();
  EXPECT_EQ(model.item_table().value().row(0).norm(), 0.0);
  const ad::Matrix& g = model.mie().bank().embeddings.value();
  for (Eigen::Index j = 0; j < g.rows(); ++j) EXPECT_NEAR(g.row(j).norm(), 1.0, 1e-12);
}

TEST(ModelTest, InvalidConstruction) {
  TrainConfig c = tiny_config();
  EXPECT_THROW(SigmaModel(c, 0, kItems, 1), ConfigError);
  EXPECT_THROW(SigmaModel(c, 2, 0, 1), DataError);
  c.heads = 3;
  EXPECT_THROW(SigmaModel(c, 2, kItems, 1), ConfigError);
}

}  // namespace
}  // namespace sigma

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

// The joint model: a sequence VAE whose prior is produced by the
// multi-interest VAE, plus the ablation variants built from the same parts.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sigma/config.hpp"
#include "sigma/interest.hpp"
#include "sigma/metrics.hpp"
#include "sigma/nn.hpp"
#include "sigma/packed.hpp"
#include "sigma/sequence.hpp"

namespace sigma {

enum class Variant { kFull, kUniPrior, kNoOrth, kMieOnly };

struct VariantSpec {
  Variant variant = Variant::kFull;
  double uni_lambda = 1e-4;

  std::string label() const;
};

// Accepts full, no_orth, mie_only, uni_prior and uni_prior(<weight>).
// Throws ConfigError for anything else.
VariantSpec parse_variant(const std::string& name);
VariantSpec variant_of(const TrainConfig& config);
// `base` reconfigured for the named variant.
TrainConfig build_variant(const std::string& name, TrainConfig base);

struct LossParts {
  ad::Var total;
  // sgm_recon, sgm_kl, mie_recon, mie_kl, orth, total; per-position means
  // except orth. Parts a variant does not compute are absent.
  std::map<std::string, double> parts;
};

class SigmaModel {
 public:
  // `k` is the resolved category count; the item table has num_items + 1 rows.
  SigmaModel(const TrainConfig& config, int k, int num_items, std::uint64_t seed);

  // Training-mode loss on a batch whose every packed row has a target.
  // `kl_scale` multiplies the sequence KL weight (warm-up).
  LossParts joint_loss(const PackedBatch& batch, ad::Rng& rng, double kl_scale = 1.0) const;

  // Evaluation-mode catalog scores (users x num_items, column c = item c + 1).
  ad::Matrix scores(const std::vector<std::vector<int>>& histories) const;
  // Top-K per history; deterministic, ties to the lower item index.
  std::vector<eval::RankedList> recommend(const std::vector<std::vector<int>>& histories, int k) const;

  // Re-projects the category bank and clears the padding row after an update.
  void after_step();

  const TrainConfig& config() const { return config_; }
  VariantSpec variant() const { return variant_; }
  int k() const { return k_; }
  int num_items() const { return num_items_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }
  const ad::Var& item_table() const { return item_table_; }
  bool has_sgm() const { return static_cast<bool>(sgm_); }
  bool has_mie() const { return static_cast<bool>(mie_); }
  const sequence::SgmVae& sgm() const;
  const interest::MieVae& mie() const;
  interest::MieVae& mie();

 private:
  ad::Matrix interest_vectors(const PackedBatch& batch) const;
  std::vector<eval::RankedList> recommend_by_interest(const std::vector<std::vector<int>>& histories, int k) const;

  TrainConfig config_;
  VariantSpec variant_;
  int k_;
  int num_items_;
  nn::ParameterStore store_;
  ad::Var item_table_;
  std::unique_ptr<sequence::SgmVae> sgm_;
  std::unique_ptr<interest::MieVae> mie_;
};

}  // namespace sigma

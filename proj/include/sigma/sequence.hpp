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

// Sequence VAE. Two causal Transformer encoders map every prefix to a
// diagonal Gaussian over the latent z_t; a Transformer decoder maps z_t to a
// query vector that scores the item catalog. The KL term is estimated from the
// single reparameterized sample against a Gaussian-mixture prior supplied by
// the caller.

#include <vector>

#include "sigma/autodiff.hpp"
#include "sigma/metrics.hpp"
#include "sigma/nn.hpp"
#include "sigma/packed.hpp"

namespace sigma::sequence {

using ad::Matrix;
using ad::Rng;
using ad::Var;

struct SequencePosterior {
  Var mean;     // R x d
  Var log_std;  // R x d, clamped

  Matrix std() const { return log_std.value().array().exp(); }
};

struct DecoderOutput {
  Var u;  // R x d
  double temperature = 1.0;
};

// Mixture prior in packed form: weights R x k, component rows r*k + j.
struct MixturePrior {
  Var weights;
  Var means;
  Var log_stds;
};

struct SgmOptions {
  int dim = 128;
  int heads = 4;
  int blocks = 2;
  int max_len = 100;
  double dropout = 0.3;
  double tau_dec = 1.0;
  bool detach_prior = false;
};

// Sum over rows of log N(z | posterior) - log sum_j w_j N(z | m_j, omega_j^2).
// Throws DomainError if a weight row is negative or does not sum to one.
Var sgm_kl(const Var& z, const SequencePosterior& posterior, const MixturePrior& prior, bool detach_prior = false);

// Closed-form sum over rows of KL(posterior || N(0, I)).
Var standard_kl(const SequencePosterior& posterior);

// softmax(catalog * u / temperature); throws DomainError for temperature <= 0.
Eigen::VectorXd item_probabilities(const Eigen::Ref<const Eigen::VectorXd>& u, const Matrix& catalog,
                                   double temperature);

// -sum_t log p(target_t | z_t); targets are catalog row indices.
Var sgm_recon_loss(const DecoderOutput& out, const Var& catalog, const std::vector<int>& targets);

class SgmVae {
 public:
  SgmVae() = default;
  // `item_table` has num_items + 1 rows, row 0 being the padding item.
  SgmVae(nn::ParameterStore& store, const Var& item_table, const SgmOptions& opts, Rng& rng);

  // rng == nullptr selects evaluation mode (no dropout).
  SequencePosterior encode_posterior(const PackedBatch& batch, Rng* rng) const;
  // mean + std * eps; the mean itself when rng is null.
  Var sample(const SequencePosterior& posterior, Rng* rng) const;
  DecoderOutput decode(const Var& z, const ad::Segments& segs, Rng* rng) const;

  // Catalog embeddings without the padding row; row c is item c + 1.
  Var catalog() const { return ad::slice_rows(item_table_, 1, item_table_.rows() - 1); }
  // Evaluation-mode query vector at the last position of every segment.
  Matrix user_vectors(const PackedBatch& batch) const;
  // Top-K items for one history, conditioning on its last position.
  eval::RankedList infer_topk(const std::vector<int>& history, int k) const;

  const SgmOptions& options() const { return opts_; }

 private:
  Var embed(const PackedBatch& batch, Rng* rng) const;

  SgmOptions opts_;
  Var item_table_;
  Var positions_;
  nn::TransformerStack enc_mu_, enc_sigma_, decoder_;
  nn::Linear mu_head_, sigma_head_;
};

}  // namespace sigma::sequence

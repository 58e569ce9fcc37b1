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

// Multi-interest extraction VAE. Items are softly classified into k implicit
// categories through a bank of unit category embeddings; per prefix position
// the model forms soft interests (probability-weighted sums), hard interests
// (a recurrent encoder over the items assigned exclusively to a category) and
// a diagonal Gaussian per interest whose intensity-weighted mixture is the
// prior of the sequence VAE.
//
// All tensors use the packed layout of PackedBatch: R rows of real positions.
// Per-interest tensors use R*k rows, interest j of row r at row r*k + j.

#include <vector>

#include "sigma/autodiff.hpp"
#include "sigma/gaussian.hpp"
#include "sigma/nn.hpp"
#include "sigma/packed.hpp"

namespace sigma::interest {

using ad::Matrix;
using ad::Rng;
using ad::Var;

struct CategoryBank {
  Var embeddings;  // k x d
  double temperature = 0.1;

  int k() const { return static_cast<int>(embeddings.rows()); }
  int dim() const { return static_cast<int>(embeddings.cols()); }
  Var normalized() const { return ad::l2_normalize_rows(embeddings); }
  // Projects every row back onto the unit sphere after an optimizer update.
  void renormalize();

  static CategoryBank create(nn::ParameterStore& store, int k, int dim, double temperature, Rng& rng);
};

// a(i, j) = softmax_j(g_j . v_i / temperature) with v_i and g_j unit-normalized.
Var category_probs(const Var& item_embeddings, const CategoryBank& bank);

// sum_{i != j} g_i . g_j over the normalized bank. With `absolute` the terms
// enter as |g_i . g_j|.
Var orthogonality_loss(const CategoryBank& bank, bool absolute = false);

struct SoftInterests {
  Var h;      // R x (k*d), h_t^j = sum_{i<=t} a_i^j v_i
  Var alpha;  // R x k, interest intensities on the simplex
};
SoftInterests soft_interests(const Var& embeddings, const Var& probs, const ad::Segments& segs);

struct HardAssignment {
  Matrix onehot;  // R x k
  Var gate;       // forward value == onehot; carries the relaxed gradient when straight-through
};
// Gumbel-softmax on log(probs); `uniform_noise` is R x k in (0, 1).
HardAssignment hard_assign(const Var& probs, double temperature, const Matrix& uniform_noise,
                           bool straight_through = true);
// Noise-free argmax assignment used at inference.
HardAssignment argmax_assign(const Var& probs);
// The k disjoint, order-preserving subsequences of one sequence.
std::vector<std::vector<int>> split_subsequences(const std::vector<int>& ids, const Matrix& onehot);

struct RecurrentEncoder {
  Var w_input, w_hidden, b_input, b_hidden;

  int hidden() const { return static_cast<int>(w_hidden.rows()); }
  static RecurrentEncoder create(nn::ParameterStore& store, const std::string& name, int in, int hidden, Rng& rng);
};

// r_t^j: recurrent state after the last item of category j at or before t.
// Categories with no item yet fall back to the soft interest h_t^j.
Var hard_interests(const Var& embeddings, const HardAssignment& assign, const Var& soft_h,
                   const RecurrentEncoder& encoder, const ad::Segments& segs);

struct InterestPosterior {
  Var probs;    // R x k category probabilities of the items
  Var alpha;    // R x k
  Var mean;     // R*k x d
  Var log_std;  // R*k x d, already clamped

  int k() const { return static_cast<int>(alpha.cols()); }
  Matrix std() const { return log_std.value().array().exp(); }
  // Mixture prior sum_j alpha_t^j N(m_t^j, omega_t^j^2) at packed row `row`.
  gaussian::GaussianMixture mixture(int row) const;
};

// m = (h + r) / 2, log omega = clamp(MLP([g_j || m]))
InterestPosterior interest_posterior(const Var& h, const Var& r, const CategoryBank& bank, const nn::Mlp& std_mlp,
                                     const Var& alpha, const Var& probs);

// Sum over rows and interests of KL(N(m, omega^2) || N(0, I)).
Var mie_kl(const InterestPosterior& post);

struct InterestSamples {
  Var x;  // R*k x d, reparameterized draws
  Var u;  // R*k x d, projected into item space
};
// `noise` of shape R*k x d; an empty matrix means "use the mean".
InterestSamples sample_interests(const InterestPosterior& post, const nn::Mlp& projection, const Matrix& noise);

// p(v) = softmax_v(max_j <u^j, v> / eps) over a catalog given as N x d rows.
Eigen::VectorXd multi_interest_score(const Matrix& interests, const Matrix& catalog, double eps);

// -sum_t log p(target_t | X_t); targets are catalog row indices.
Var mie_recon_loss(const InterestSamples& samples, const std::vector<int>& targets, const Var& catalog, double eps);

struct MieOptions {
  int dim = 128;
  int k = 4;
  double tau_cat = 0.1;
  double eps_score = 1.0;
  double gumbel_temperature = 0.5;
  bool straight_through = true;
  bool orth_abs = false;
};

class MieVae {
 public:
  struct Output {
    Var probs;
    SoftInterests soft;
    HardAssignment assign;
    Var hard;
    InterestPosterior posterior;
    InterestSamples samples;
  };

  MieVae() = default;
  MieVae(nn::ParameterStore& store, const MieOptions& opts, Rng& rng);

  // With a noise stream: Gumbel assignment and reparameterized samples.
  // Without: argmax assignment and the posterior means.
  Output forward(const Var& item_table, const PackedBatch& batch, Rng* noise) const;
  Var orthogonality() const { return orthogonality_loss(bank_, opts_.orth_abs); }

  const MieOptions& options() const { return opts_; }
  CategoryBank& bank() { return bank_; }
  const CategoryBank& bank() const { return bank_; }

 private:
  MieOptions opts_;
  CategoryBank bank_;
  RecurrentEncoder encoder_;
  nn::Mlp std_mlp_;
  nn::Mlp projection_;
};

}  // namespace sigma::interest

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

#include "sigma/sequence.hpp"

#include <cmath>

#include "sigma/errors.hpp"
#include "sigma/fused_ops.hpp"
#include "sigma/gaussian.hpp"

namespace sigma::sequence {

Var sgm_kl(const Var& z, const SequencePosterior& posterior, const MixturePrior& prior, bool detach_prior) {
  const Matrix& w = prior.weights.value();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    if ((w.row(r).array() < 0.0).any() || std::abs(w.row(r).sum() - 1.0) > 1e-6) {
      throw DomainError("sgm_kl: mixture weights of row " + std::to_string(r) + " are not on the simplex");
    }
  }
  Var weights = detach_prior ? ad::detach(prior.weights) : prior.weights;
  Var means = detach_prior ? ad::detach(prior.means) : prior.means;
  Var log_stds = detach_prior ? ad::detach(prior.log_stds) : prior.log_stds;
  Var log_q = ad::gaussian_log_density_rows(z, posterior.mean, posterior.log_std);
  Var log_p = ad::mixture_log_density_rows(z, weights, means, log_stds);
  return ad::sum(ad::sub(log_q, log_p));
}

Var standard_kl(const SequencePosterior& posterior) {
  return ad::sum(ad::kl_standard_rows(posterior.mean, posterior.log_std));
}

Eigen::VectorXd item_probabilities(const Eigen::Ref<const Eigen::VectorXd>& u, const Matrix& catalog,
                                   double temperature) {
  if (!(temperature > 0.0)) throw DomainError("item_probabilities: temperature must be positive");
  if (u.size() != catalog.cols()) throw DomainError("item_probabilities: width mismatch");
  Eigen::VectorXd s = catalog * u / temperature;
  s = (s.array() - s.maxCoeff()).exp();
  return s / s.sum();
}

Var sgm_recon_loss(const DecoderOutput& out, const Var& catalog, const std::vector<int>& targets) {
  if (targets.empty()) return ad::scalar(0.0);
  return ad::catalog_xent(out.u, catalog, targets, out.temperature);
}

SgmVae::SgmVae(nn::ParameterStore& store, const Var& item_table, const SgmOptions& opts, Rng& rng)
    : opts_(opts), item_table_(item_table) {
  if (item_table.cols() != opts.dim) throw DomainError("SgmVae: item table width differs from dim");
  positions_ = store.add("sgm.positions", ad::normal_matrix(opts.max_len, opts.dim, rng, 1.0 / std::sqrt(opts.dim)));
  nn::TransformerStack::Options t{opts.dim, opts.heads, opts.blocks, opts.dim, opts.dropout};
  enc_mu_ = nn::TransformerStack(store, "sgm.enc_mu", t, rng);
  enc_sigma_ = nn::TransformerStack(store, "sgm.enc_sigma", t, rng);
  decoder_ = nn::TransformerStack(store, "sgm.decoder", t, rng);
  mu_head_ = nn::Linear::create(store, "sgm.mu_head", opts.dim, opts.dim, rng);
  sigma_head_ = nn::Linear::create(store, "sgm.sigma_head", opts.dim, opts.dim, rng);
}

Var SgmVae::embed(const PackedBatch& batch, Rng* rng) const {
  for (int p : batch.positions) {
    if (p < 0 || p >= opts_.max_len) throw DomainError("SgmVae: position beyond max_len");
  }
  Var x = ad::add(ad::gather_rows(item_table_, batch.ids), ad::gather_rows(positions_, batch.positions));
  return ad::dropout(x, opts_.dropout, rng);
}

SequencePosterior SgmVae::encode_posterior(const PackedBatch& batch, Rng* rng) const {
  Var x = embed(batch, rng);
  SequencePosterior post;
  post.mean = mu_head_(enc_mu_(x, batch.segs, rng));
  post.log_std = ad::clamp(sigma_head_(enc_sigma_(x, batch.segs, rng)), gaussian::kLogStdMin, gaussian::kLogStdMax);
  return post;
}

Var SgmVae::sample(const SequencePosterior& posterior, Rng* rng) const {
  if (!rng) return posterior.mean;
  Matrix eps = ad::normal_matrix(posterior.mean.rows(), posterior.mean.cols(), *rng);
  return ad::add(posterior.mean, ad::mul(ad::exp(posterior.log_std), ad::constant(eps)));
}

DecoderOutput SgmVae::decode(const Var& z, const ad::Segments& segs, Rng* rng) const {
  return DecoderOutput{decoder_(z, segs, rng), opts_.tau_dec};
}

Matrix SgmVae::user_vectors(const PackedBatch& batch) const {
  ad::NoGradGuard no_grad;
  SequencePosterior post = encode_posterior(batch, nullptr);
  Matrix u = decode(ad::detach(post.mean), batch.segs, nullptr).u.value();
  std::vector<int> last = batch.segs.last_rows();
  Matrix out(static_cast<Eigen::Index>(last.size()), u.cols());
  for (size_t i = 0; i < last.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = u.row(last[i]);
  return out;
}

eval::RankedList SgmVae::infer_topk(const std::vector<int>& history, int k) const {
  if (history.empty()) throw DomainError("infer_topk: empty history");
  ad::NoGradGuard no_grad;
  PackedBatch batch = pack(corpus::make_history_batch({history}, opts_.max_len));
  Matrix u = user_vectors(batch);
  Eigen::VectorXd scores = catalog().value() * u.row(0).transpose() / opts_.tau_dec;
  return eval::top_k(scores, k);
}

}  // namespace sigma::sequence

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

#include "sigma/interest.hpp"

#include <cmath>

#include "sigma/errors.hpp"
#include "sigma/fused_ops.hpp"

namespace sigma::interest {

void CategoryBank::renormalize() {
  Matrix& g = embeddings.mutable_value();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    double n = g.row(i).norm();
    if (n > 0) g.row(i) /= n;
  }
}

CategoryBank CategoryBank::create(nn::ParameterStore& store, int k, int dim, double temperature, Rng& rng) {
  if (k < 1) throw DomainError("category bank needs k >= 1");
  CategoryBank bank;
  bank.embeddings = store.add("mie.categories", ad::normal_matrix(k, dim, rng));
  bank.temperature = temperature;
  bank.renormalize();
  return bank;
}

Var category_probs(const Var& item_embeddings, const CategoryBank& bank) {
  if (!(bank.temperature > 0.0)) throw DomainError("category_probs: temperature must be positive");
  Var scores = ad::matmul_nt(ad::l2_normalize_rows(item_embeddings), bank.normalized());
  return ad::softmax_rows(ad::scale(scores, 1.0 / bank.temperature));
}

Var orthogonality_loss(const CategoryBank& bank, bool absolute) {
  Var g = bank.normalized();
  Var gram = ad::matmul_nt(g, g);
  Var all = absolute ? ad::sum(ad::abs(gram)) : ad::sum(gram);
  return ad::sub(all, ad::sum(ad::square(g)));
}

SoftInterests soft_interests(const Var& embeddings, const Var& probs, const ad::Segments& segs) {
  if (embeddings.rows() != probs.rows()) throw DomainError("soft_interests: row mismatch");
  SoftInterests out;
  out.h = ad::causal_cumsum(ad::row_outer(probs, embeddings), segs);
  Var mass = ad::causal_cumsum(probs, segs);
  // Each probability row sums to one, so the normaliser is the number of real
  // items up to t.
  Matrix inv_count(probs.rows(), 1);
  for (int b = 0; b < segs.count(); ++b) {
    for (int t = 0; t < segs.length(b); ++t) inv_count(segs.begin(b) + t, 0) = 1.0 / (t + 1);
  }
  out.alpha = ad::mul_col(mass, ad::constant(inv_count));
  return out;
}

namespace {

Matrix onehot_argmax(const Matrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index j;
    m.row(r).maxCoeff(&j);
    out(r, j) = 1.0;
  }
  return out;
}

}  // namespace

HardAssignment hard_assign(const Var& probs, double temperature, const Matrix& uniform_noise, bool straight_through) {
  if (!(temperature > 0.0)) throw DomainError("hard_assign: temperature must be positive");
  if (uniform_noise.rows() != probs.rows() || uniform_noise.cols() != probs.cols()) {
    throw DomainError("hard_assign: noise shape");
  }
  Matrix u = uniform_noise.array().max(gaussian::kGumbelClip).min(1.0 - gaussian::kGumbelClip);
  Matrix gumbel = -(-u.array().log()).log();
  Var soft = ad::softmax_rows(ad::scale(ad::add(ad::log(probs), ad::constant(gumbel)), 1.0 / temperature));
  HardAssignment a;
  a.onehot = onehot_argmax(soft.value());
  a.gate = straight_through ? ad::straight_through(a.onehot, soft) : ad::constant(a.onehot);
  return a;
}

HardAssignment argmax_assign(const Var& probs) {
  HardAssignment a;
  a.onehot = onehot_argmax(probs.value());
  a.gate = ad::constant(a.onehot);
  return a;
}

std::vector<std::vector<int>> split_subsequences(const std::vector<int>& ids, const Matrix& onehot) {
  if (static_cast<Eigen::Index>(ids.size()) != onehot.rows()) throw DomainError("split_subsequences: row mismatch");
  std::vector<std::vector<int>> subs(onehot.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    Eigen::Index j;
    onehot.row(static_cast<Eigen::Index>(i)).maxCoeff(&j);
    subs[j].push_back(ids[i]);
  }
  return subs;
}

RecurrentEncoder RecurrentEncoder::create(nn::ParameterStore& store, const std::string& name, int in, int hidden,
                                          Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  RecurrentEncoder e;
  e.w_input = store.add(name + ".w_input", ad::uniform_matrix(in, 3 * hidden, rng, -bound, bound));
  e.w_hidden = store.add(name + ".w_hidden", ad::uniform_matrix(hidden, 3 * hidden, rng, -bound, bound));
  e.b_input = store.add(name + ".b_input", ad::uniform_matrix(1, 3 * hidden, rng, -bound, bound));
  e.b_hidden = store.add(name + ".b_hidden", ad::uniform_matrix(1, 3 * hidden, rng, -bound, bound));
  return e;
}

Var hard_interests(const Var& embeddings, const HardAssignment& assign, const Var& soft_h,
                   const RecurrentEncoder& encoder, const ad::Segments& segs) {
  const Eigen::Index k = assign.onehot.cols(), d = encoder.hidden();
  if (soft_h.cols() != k * d) throw DomainError("hard_interests: soft interest width");
  Var states = ad::masked_gru(embeddings, assign.gate, encoder.w_input, encoder.w_hidden, encoder.b_input,
                              encoder.b_hidden, segs);
  Matrix seen = Matrix::Zero(embeddings.rows(), k * d);
  for (int b = 0; b < segs.count(); ++b) {
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (int t = 0; t < segs.length(b); ++t) {
      const int r = segs.begin(b) + t;
      count += assign.onehot.row(r).transpose();
      for (Eigen::Index j = 0; j < k; ++j) {
        if (count(j) > 0.5) seen.row(r).segment(j * d, d).setOnes();
      }
    }
  }
  Matrix unseen = Matrix::Ones(seen.rows(), seen.cols()) - seen;
  return ad::add(ad::mul(states, ad::constant(seen)), ad::mul(soft_h, ad::constant(unseen)));
}

gaussian::GaussianMixture InterestPosterior::mixture(int row) const {
  gaussian::GaussianMixture p;
  const int kk = k();
  p.weights = alpha.value().row(row).transpose();
  for (int j = 0; j < kk; ++j) {
    p.components.push_back(gaussian::DiagGaussian{mean.value().row(row * kk + j).transpose(),
                                                  log_std.value().row(row * kk + j).array().exp().transpose()});
  }
  return p;
}

InterestPosterior interest_posterior(const Var& h, const Var& r, const CategoryBank& bank, const nn::Mlp& std_mlp,
                                     const Var& alpha, const Var& probs) {
  const int k = bank.k(), d = bank.dim();
  const Eigen::Index rows = h.rows();
  InterestPosterior post;
  post.probs = probs;
  post.alpha = alpha;
  post.mean = ad::reshape(ad::scale(ad::add(h, r), 0.5), rows * k, d);
  Var g = ad::tile_rows(bank.normalized(), static_cast<int>(rows));
  post.log_std = ad::clamp(std_mlp(ad::concat_cols({g, post.mean})), gaussian::kLogStdMin, gaussian::kLogStdMax);
  return post;
}

Var mie_kl(const InterestPosterior& post) { return ad::sum(ad::kl_standard_rows(post.mean, post.log_std)); }

InterestSamples sample_interests(const InterestPosterior& post, const nn::Mlp& projection, const Matrix& noise) {
  InterestSamples s;
  if (noise.size() == 0) {
    s.x = post.mean;
  } else {
    if (noise.rows() != post.mean.rows() || noise.cols() != post.mean.cols()) {
      throw DomainError("sample_interests: noise shape");
    }
    s.x = ad::add(post.mean, ad::mul(ad::exp(post.log_std), ad::constant(noise)));
  }
  s.u = projection(s.x);
  return s;
}

Eigen::VectorXd multi_interest_score(const Matrix& interests, const Matrix& catalog, double eps) {
  if (!(eps > 0.0)) throw DomainError("multi_interest_score: eps must be positive");
  if (interests.cols() != catalog.cols()) throw DomainError("multi_interest_score: width mismatch");
  Eigen::VectorXd s = (catalog * interests.transpose()).rowwise().maxCoeff() / eps;
  s = (s.array() - s.maxCoeff()).exp();
  return s / s.sum();
}

Var mie_recon_loss(const InterestSamples& samples, const std::vector<int>& targets, const Var& catalog, double eps) {
  if (targets.empty()) return ad::scalar(0.0);
  const int k = static_cast<int>(samples.u.rows() / static_cast<Eigen::Index>(targets.size()));
  return ad::max_interest_xent(samples.u, catalog, targets, k, eps);
}

MieVae::MieVae(nn::ParameterStore& store, const MieOptions& opts, Rng& rng) : opts_(opts) {
  bank_ = CategoryBank::create(store, opts.k, opts.dim, opts.tau_cat, rng);
  encoder_ = RecurrentEncoder::create(store, "mie.gru", opts.dim, opts.dim, rng);
  std_mlp_ = nn::Mlp::create(store, "mie.std_mlp", 2 * opts.dim, opts.dim, opts.dim, rng);
  projection_ = nn::Mlp::create(store, "mie.projection", opts.dim, opts.dim, opts.dim, rng);
}

MieVae::Output MieVae::forward(const Var& item_table, const PackedBatch& batch, Rng* noise) const {
  Output out;
  Var v = ad::gather_rows(item_table, batch.ids);
  out.probs = category_probs(v, bank_);
  out.soft = soft_interests(v, out.probs, batch.segs);
  if (noise) {
    Matrix u = ad::uniform_matrix(out.probs.rows(), out.probs.cols(), *noise, 0.0, 1.0);
    out.assign = hard_assign(out.probs, opts_.gumbel_temperature, u, opts_.straight_through);
  } else {
    out.assign = argmax_assign(out.probs);
  }
  out.hard = hard_interests(v, out.assign, out.soft.h, encoder_, batch.segs);
  out.posterior = interest_posterior(out.soft.h, out.hard, bank_, std_mlp_, out.soft.alpha, out.probs);
  Matrix eps;
  if (noise) eps = ad::normal_matrix(out.posterior.mean.rows(), out.posterior.mean.cols(), *noise);
  out.samples = sample_interests(out.posterior, projection_, eps);
  return out;
}

}  // namespace sigma::interest

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "sigma/errors.hpp"

namespace sigma {

using ad::Var;

std::string VariantSpec::label() const {
  switch (variant) {
    case Variant::kFull:
      return "full";
    case Variant::kNoOrth:
      return "no_orth";
    case Variant::kMieOnly:
      return "mie_only";
    case Variant::kUniPrior: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "uni_prior(%g)", uni_lambda);
      return buf;
    }
  }
  return "unknown";
}

VariantSpec parse_variant(const std::string& name) {
  VariantSpec v;
  if (name == "full") return v;
  if (name == "no_orth") {
    v.variant = Variant::kNoOrth;
    return v;
  }
  if (name == "mie_only") {
    v.variant = Variant::kMieOnly;
    return v;
  }
  if (name.rfind("uni_prior", 0) == 0) {
    v.variant = Variant::kUniPrior;
    const std::string rest = name.substr(9);
    if (rest.empty()) return v;
    if (rest.size() > 2 && rest.front() == '(' && rest.back() == ')') {
      try {
        size_t used = 0;
        const std::string inner = rest.substr(1, rest.size() - 2);
        v.uni_lambda = std::stod(inner, &used);
        if (used == inner.size() && v.uni_lambda >= 0 && std::isfinite(v.uni_lambda)) return v;
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("unknown variant '" + name + "'");
}

VariantSpec variant_of(const TrainConfig& config) {
  VariantSpec v = parse_variant(config.variant);
  if (v.variant == Variant::kUniPrior) v.uni_lambda = config.uni_lambda;
  return v;
}

TrainConfig build_variant(const std::string& name, TrainConfig base) {
  VariantSpec v = parse_variant(name);
  switch (v.variant) {
    case Variant::kFull:
      base.variant = "full";
      break;
    case Variant::kNoOrth:
      base.variant = "no_orth";
      base.beta2 = 0.0;
      break;
    case Variant::kMieOnly:
      base.variant = "mie_only";
      break;
    case Variant::kUniPrior:
      base.variant = "uni_prior";
      if (name != "uni_prior") base.uni_lambda = v.uni_lambda;
      break;
  }
  return base;
}

SigmaModel::SigmaModel(const TrainConfig& config, int k, int num_items, std::uint64_t seed)
    : config_(config), variant_(variant_of(config)), k_(k), num_items_(num_items) {
  config_.validate();
  if (k < 1) throw ConfigError("category count must be >= 1");
  if (num_items < 1) throw DataError("catalog is empty");
  ad::Rng rng(seed);
  ad::Matrix table = ad::normal_matrix(num_items + 1, config.dim, rng, 1.0 / std::sqrt(config.dim));
  table.row(corpus::kPadItem).setZero();
  item_table_ = store_.add("items", std::move(table));
  if (variant_.variant != Variant::kMieOnly) {
    sequence::SgmOptions s{config.dim, config.heads, config.blocks, config.max_len,
                           config.dropout, config.tau_dec, config.detach_prior};
    sgm_ = std::make_unique<sequence::SgmVae>(store_, item_table_, s, rng);
  }
  if (variant_.variant != Variant::kUniPrior) {
    interest::MieOptions m{config.dim, k, config.tau_cat, config.eps_score, config.gumbel_temperature,
                           config.straight_through, config.orth_abs};
    mie_ = std::make_unique<interest::MieVae>(store_, m, rng);
  }
}

const sequence::SgmVae& SigmaModel::sgm() const {
  if (!sgm_) throw DomainError("variant " + variant_.label() + " has no sequence VAE");
  return *sgm_;
}

const interest::MieVae& SigmaModel::mie() const {
  if (!mie_) throw DomainError("variant " + variant_.label() + " has no interest VAE");
  return *mie_;
}

interest::MieVae& SigmaModel::mie() {
  if (!mie_) throw DomainError("variant " + variant_.label() + " has no interest VAE");
  return *mie_;
}

LossParts SigmaModel::joint_loss(const PackedBatch& batch, ad::Rng& rng, double kl_scale) const {
  if (batch.rows() == 0) throw DomainError("joint_loss: empty batch");
  if (!batch.has_targets()) throw DomainError("joint_loss: every position needs a target");
  std::vector<int> targets(batch.targets.size());
  for (size_t i = 0; i < targets.size(); ++i) targets[i] = batch.targets[i] - 1;
  const double inv_rows = 1.0 / batch.rows();
  Var catalog = ad::slice_rows(item_table_, 1, num_items_);

  LossParts out;
  std::vector<std::pair<std::string, Var>> terms;  // name, weighted contribution
  auto record = [&](const std::string& name, const Var& value) {
    const double v = value.item();
    if (!std::isfinite(v)) throw NumericError("non-finite loss part '" + name + "'");
    out.parts[name] = v;
  };

  Var sgm_z;
  sequence::SequencePosterior sgm_post;
  if (sgm_) {
    sgm_post = sgm_->encode_posterior(batch, &rng);
    sgm_z = sgm_->sample(sgm_post, &rng);
    auto decoded = sgm_->decode(sgm_z, batch.segs, &rng);
    Var recon = ad::scale(sequence::sgm_recon_loss(decoded, catalog, targets), inv_rows);
    record("sgm_recon", recon);
    terms.emplace_back("sgm_recon", recon);
  }
  if (mie_) {
    auto m = mie_->forward(item_table_, batch, &rng);
    Var recon = ad::scale(interest::mie_recon_loss(m.samples, targets, catalog, config_.eps_score), inv_rows);
    Var kl = ad::scale(interest::mie_kl(m.posterior), inv_rows);
    Var orth = mie_->orthogonality();
    record("mie_recon", recon);
    record("mie_kl", kl);
    record("orth", orth);
    const double beta2 = variant_.variant == Variant::kNoOrth ? 0.0 : config_.beta2;
    const double beta1 = variant_.variant == Variant::kMieOnly ? 1.0 : config_.beta1;
    terms.emplace_back("mie", ad::scale(ad::add(recon, kl), beta1));
    terms.emplace_back("orth", ad::scale(orth, beta2));
    if (sgm_) {
      sequence::MixturePrior prior{m.posterior.alpha, m.posterior.mean, m.posterior.log_std};
      Var kl_sgm = ad::scale(sequence::sgm_kl(sgm_z, sgm_post, prior, config_.detach_prior), inv_rows);
      record("sgm_kl", kl_sgm);
      terms.emplace_back("sgm_kl", ad::scale(kl_sgm, config_.lambda * kl_scale));
    }
  } else {
    Var kl = ad::scale(sequence::standard_kl(sgm_post), inv_rows);
    record("sgm_kl", kl);
    terms.emplace_back("sgm_kl", ad::scale(kl, variant_.uni_lambda * kl_scale));
  }

  out.total = terms.front().second;
  for (size_t i = 1; i < terms.size(); ++i) out.total = ad::add(out.total, terms[i].second);
  record("total", out.total);
  return out;
}

ad::Matrix SigmaModel::interest_vectors(const PackedBatch& batch) const {
  ad::NoGradGuard no_grad;
  auto m = mie().forward(item_table_, batch, nullptr);
  const ad::Matrix& u = m.samples.u.value();
  std::vector<int> last = batch.segs.last_rows();
  ad::Matrix out(static_cast<Eigen::Index>(last.size()) * k_, u.cols());
  for (size_t i = 0; i < last.size(); ++i) {
    out.middleRows(static_cast<Eigen::Index>(i) * k_, k_) = u.middleRows(static_cast<Eigen::Index>(last[i]) * k_, k_);
  }
  return out;
}

namespace {

PackedBatch history_batch(const std::vector<std::vector<int>>& histories, size_t begin, size_t end, int max_len) {
  std::vector<std::vector<int>> chunk(histories.begin() + begin, histories.begin() + end);
  for (const auto& h : chunk) {
    if (h.empty()) throw DomainError("cannot score an empty history");
  }
  return pack(corpus::make_history_batch(chunk, max_len));
}

}  // namespace

ad::Matrix SigmaModel::scores(const std::vector<std::vector<int>>& histories) const {
  ad::NoGradGuard no_grad;
  const ad::Matrix catalog = item_table_.value().bottomRows(num_items_);
  ad::Matrix out(static_cast<Eigen::Index>(histories.size()), num_items_);
  const size_t step = static_cast<size_t>(config_.eval_batch_size);
  for (size_t b = 0; b < histories.size(); b += step) {
    const size_t e = std::min(histories.size(), b + step);
    PackedBatch batch = history_batch(histories, b, e, config_.max_len);
    if (sgm_) {
      out.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)) =
          sgm_->user_vectors(batch) * catalog.transpose() / config_.tau_dec;
    } else {
      ad::Matrix u = interest_vectors(batch);
      ad::Matrix all = u * catalog.transpose() / config_.eps_score;
      for (size_t i = 0; i < e - b; ++i) {
        out.row(static_cast<Eigen::Index>(b + i)) =
            all.middleRows(static_cast<Eigen::Index>(i) * k_, k_).colwise().maxCoeff();
      }
    }
  }
  return out;
}

std::vector<eval::RankedList> SigmaModel::recommend(const std::vector<std::vector<int>>& histories, int k) const {
  if (!sgm_) return recommend_by_interest(histories, k);
  std::vector<eval::RankedList> lists;
  lists.reserve(histories.size());
  const size_t step = static_cast<size_t>(config_.eval_batch_size);
  for (size_t b = 0; b < histories.size(); b += step) {
    const size_t e = std::min(histories.size(), b + step);
    std::vector<std::vector<int>> chunk(histories.begin() + b, histories.begin() + e);
    ad::Matrix s = scores(chunk);
    for (size_t i = 0; i < e - b; ++i) {
      lists.push_back(eval::top_k(s.row(static_cast<Eigen::Index>(i)).transpose(), k, 1, static_cast<int>(b + i)));
    }
  }
  return lists;
}

std::vector<eval::RankedList> SigmaModel::recommend_by_interest(const std::vector<std::vector<int>>& histories,
                                                                int k) const {
  const ad::Matrix catalog = item_table_.value().bottomRows(num_items_);
  const int per_interest = std::max(k, config_.retrieve_per_interest);
  std::vector<eval::RankedList> lists;
  lists.reserve(histories.size());
  const size_t step = static_cast<size_t>(config_.eval_batch_size);
  for (size_t b = 0; b < histories.size(); b += step) {
    const size_t e = std::min(histories.size(), b + step);
    ad::Matrix u = interest_vectors(history_batch(histories, b, e, config_.max_len));
    ad::Matrix all = u * catalog.transpose() / config_.eps_score;
    for (size_t i = 0; i < e - b; ++i) {
      std::unordered_map<int, double> pool;
      for (int j = 0; j < k_; ++j) {
        eval::RankedList r = eval::top_k(all.row(static_cast<Eigen::Index>(i) * k_ + j).transpose(), per_interest);
        for (int n = 0; n < r.size(); ++n) {
          auto [it, inserted] = pool.emplace(r.items[n], r.scores[n]);
          if (!inserted) it->second = std::max(it->second, r.scores[n]);
        }
      }
      std::vector<std::pair<int, double>> merged(pool.begin(), pool.end());
      std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& c) {
        return a.second > c.second || (a.second == c.second && a.first < c.first);
      });
      eval::RankedList list;
      list.user = static_cast<int>(b + i);
      for (size_t n = 0; n < merged.size() && static_cast<int>(n) < k; ++n) {
        list.items.push_back(merged[n].first);
        list.scores.push_back(merged[n].second);
      }
      lists.push_back(std::move(list));
    }
  }
  return lists;
}

void SigmaModel::after_step() {
  if (mie_) mie_->bank().renormalize();
  item_table_.mutable_value().row(corpus::kPadItem).setZero();
}

}  // namespace sigma

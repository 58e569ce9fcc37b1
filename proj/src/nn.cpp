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

#include "sigma/nn.hpp"

#include <cmath>

#include "sigma/errors.hpp"

namespace sigma::nn {

Var ParameterStore::add(const std::string& name, Matrix init) {
  if (contains(name)) throw DomainError("duplicate parameter " + name);
  Var v = ad::parameter(std::move(init));
  index_[name] = params_.size();
  params_.emplace_back(name, v);
  return v;
}

const Var& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DomainError("unknown parameter " + name);
  return params_[it->second].second;
}

void ParameterStore::zero_grad() const {
  for (const auto& [name, v] : params_) v.zero_grad();
}

std::vector<Matrix> ParameterStore::snapshot() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const auto& [name, v] : params_) out.push_back(v.value());
  return out;
}

void ParameterStore::restore(const std::vector<Matrix>& values) {
  if (values.size() != params_.size()) throw DomainError("restore: parameter count mismatch");
  for (size_t i = 0; i < values.size(); ++i) {
    Var v = params_[i].second;
    if (v.rows() != values[i].rows() || v.cols() != values[i].cols()) {
      throw DomainError("restore: shape mismatch for " + params_[i].first);
    }
    v.mutable_value() = values[i];
  }
}

Linear Linear::create(ParameterStore& store, const std::string& name, int in, int out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.weight = store.add(name + ".weight", ad::uniform_matrix(in, out, rng, -bound, bound));
  l.bias = store.add(name + ".bias", Matrix::Zero(1, out));
  return l;
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, int dim) {
  LayerNorm n;
  n.gamma = store.add(name + ".gamma", Matrix::Ones(1, dim));
  n.beta = store.add(name + ".beta", Matrix::Zero(1, dim));
  return n;
}

Mlp Mlp::create(ParameterStore& store, const std::string& name, int in, int hidden, int out, Rng& rng) {
  return Mlp{Linear::create(store, name + ".0", in, hidden, rng), Linear::create(store, name + ".1", hidden, out, rng)};
}

TransformerStack::TransformerStack(ParameterStore& store, const std::string& name, const Options& opts, Rng& rng)
    : opts_(opts) {
  if (opts.dim % opts.heads != 0) throw DomainError("hidden dimension must be divisible by the head count");
  for (int b = 0; b < opts.blocks; ++b) {
    const std::string p = name + ".block" + std::to_string(b);
    TransformerBlock blk;
    blk.attn_norm = LayerNorm::create(store, p + ".attn_norm", opts.dim);
    blk.query = Linear::create(store, p + ".query", opts.dim, opts.dim, rng);
    blk.key = Linear::create(store, p + ".key", opts.dim, opts.dim, rng);
    blk.value = Linear::create(store, p + ".value", opts.dim, opts.dim, rng);
    blk.proj = Linear::create(store, p + ".proj", opts.dim, opts.dim, rng);
    blk.ffn_norm = LayerNorm::create(store, p + ".ffn_norm", opts.dim);
    blk.ffn_in = Linear::create(store, p + ".ffn_in", opts.dim, opts.ffn_dim, rng);
    blk.ffn_out = Linear::create(store, p + ".ffn_out", opts.ffn_dim, opts.dim, rng);
    blocks_.push_back(blk);
  }
  final_norm_ = LayerNorm::create(store, name + ".final_norm", opts.dim);
}

Var TransformerStack::operator()(const Var& x, const ad::Segments& segs, Rng* rng) const {
  Var h = x;
  for (const auto& blk : blocks_) {
    Var n = blk.attn_norm(h);
    Var att = ad::causal_attention(blk.query(n), blk.key(n), blk.value(n), segs, opts_.heads);
    h = ad::add(h, ad::dropout(blk.proj(att), opts_.dropout, rng));
    Var f = blk.ffn_out(ad::relu(blk.ffn_in(blk.ffn_norm(h))));
    h = ad::add(h, ad::dropout(f, opts_.dropout, rng));
  }
  return final_norm_(h);
}

Adam::Adam(const ParameterStore& store, Options opts) : store_(&store), opts_(opts) {
  for (const auto& [name, v] : store.items()) {
    m_.push_back(Matrix::Zero(v.rows(), v.cols()));
    v_.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  const auto& items = store_->items();
  for (size_t i = 0; i < items.size(); ++i) {
    Var p = items[i].second;
    if (p.node()->grad.size() == 0) continue;
    const Matrix& g = p.node()->grad;
    m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g;
    v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g.cwiseProduct(g);
    p.mutable_value().array() -=
        opts_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + opts_.eps);
  }
}

}  // namespace sigma::nn

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

#include <map>
#include <string>
#include <vector>

#include "sigma/autodiff.hpp"
#include "sigma/fused_ops.hpp"

namespace sigma::nn {

using ad::Matrix;
using ad::Rng;
using ad::Var;

// Named, ordered collection of trainable tensors.
class ParameterStore {
 public:
  Var add(const std::string& name, Matrix init);
  const Var& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const std::vector<std::pair<std::string, Var>>& items() const { return params_; }
  void zero_grad() const;
  size_t size() const { return params_.size(); }
  // Deep copy of every value, e.g. to keep the best epoch around.
  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& values);

 private:
  std::vector<std::pair<std::string, Var>> params_;
  std::map<std::string, size_t> index_;
};

struct Linear {
  Var weight;  // in x out
  Var bias;    // 1 x out

  static Linear create(ParameterStore& store, const std::string& name, int in, int out, Rng& rng);
  Var operator()(const Var& x) const { return ad::add_row(ad::matmul(x, weight), bias); }
};

struct LayerNorm {
  Var gamma, beta;

  static LayerNorm create(ParameterStore& store, const std::string& name, int dim);
  Var operator()(const Var& x) const { return ad::layer_norm(x, gamma, beta); }
};

// Two affine layers with a nonlinearity in between.
struct Mlp {
  Linear first, second;

  static Mlp create(ParameterStore& store, const std::string& name, int in, int hidden, int out, Rng& rng);
  Var operator()(const Var& x) const { return second(ad::tanh(first(x))); }
};

struct TransformerBlock {
  LayerNorm attn_norm, ffn_norm;
  Linear query, key, value, proj, ffn_in, ffn_out;
};

// Pre-norm causal Transformer over packed segments.
class TransformerStack {
 public:
  struct Options {
    int dim = 128;
    int heads = 4;
    int blocks = 2;
    int ffn_dim = 128;
    double dropout = 0.3;
  };

  TransformerStack() = default;
  TransformerStack(ParameterStore& store, const std::string& name, const Options& opts, Rng& rng);

  // rng == nullptr disables dropout (evaluation mode).
  Var operator()(const Var& x, const ad::Segments& segs, Rng* rng) const;
  const Options& options() const { return opts_; }

 private:
  Options opts_;
  std::vector<TransformerBlock> blocks_;
  LayerNorm final_norm_;
};

class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  explicit Adam(const ParameterStore& store, Options opts);
  Adam(const ParameterStore& store, double lr) : Adam(store, Options{lr}) {}
  // Applies one update from the gradients currently held by the parameters.
  void step();
  long steps() const { return t_; }

  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  const ParameterStore* store_;
  Options opts_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace sigma::nn

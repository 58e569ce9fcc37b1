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

// Shared helpers for the test binaries: finite differences, toy batches and a
// synthetic genre-structured interaction log.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sigma/autodiff.hpp"
#include "sigma/config.hpp"
#include "sigma/corpus.hpp"
#include "sigma/metrics.hpp"
#include "sigma/packed.hpp"

namespace sigma::testing {

using ad::Matrix;
using ad::Rng;
using ad::Var;

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Central differences of `loss` with respect to the value held by `param`.
inline Matrix numeric_gradient(const Var& param, const std::function<double()>& loss, double h = 1e-6) {
  Var p = param;
  Matrix& x = p.mutable_value();
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = loss();
    x.data()[i] = keep - h;
    const double down = loss();
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Gradient of the scalar built by `build` with respect to `param`.
inline Matrix analytic_gradient(const Var& param, const std::function<Var()>& build) {
  param.zero_grad();
  Var root = build();
  ad::backward(root);
  return param.grad();
}

inline double gradient_error(const Var& param, const std::function<Var()>& build, double h = 1e-6) {
  Matrix analytic = analytic_gradient(param, build);
  Matrix numeric = numeric_gradient(param, [&] { return build().item(); }, h);
  return relative_error(analytic, numeric);
}

// `rows` histories of length in [1, max_len] over items [1, num_items].
inline std::vector<std::vector<int>> random_histories(Rng& rng, int rows, int max_len, int num_items,
                                                      int min_len = 1) {
  std::uniform_int_distribution<int> len(min_len, max_len), item(1, num_items);
  std::vector<std::vector<int>> out(rows);
  for (auto& h : out) {
    h.resize(len(rng));
    for (int& v : h) v = item(rng);
  }
  return out;
}

// Packed batch with next-item targets for every position.
inline PackedBatch random_training_batch(Rng& rng, int rows, int max_len, int num_items) {
  std::vector<corpus::Split> splits;
  for (auto& h : random_histories(rng, rows, max_len + 1, num_items, 2)) {
    corpus::Split s;
    s.train.items = h;
    splits.push_back(s);
  }
  std::vector<const corpus::Split*> ptrs;
  for (const auto& s : splits) ptrs.push_back(&s);
  return pack(corpus::make_training_batch(ptrs, max_len));
}

struct SyntheticOptions {
  int users = 300;
  int items = 120;
  int genres = 6;
  int min_len = 6;
  int max_len = 18;
  double stay = 0.85;  // probability that the next item comes from the user's genre
  std::uint64_t seed = 7;
};

// Users walk through the items of a favourite genre in catalog order, with
// occasional random jumps. Every item carries its genre; every tenth item also
// carries the next genre.
inline corpus::InteractionLog synthetic_log(const SyntheticOptions& o) {
  Rng rng(o.seed);
  const int per_genre = o.items / o.genres;
  std::uniform_int_distribution<int> genre(0, o.genres - 1), len(o.min_len, o.max_len), any(0, o.items - 1),
      offset(0, per_genre - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  corpus::InteractionLog log;
  long order = 0;
  for (int u = 0; u < o.users; ++u) {
    const int g = genre(rng);
    int pos = offset(rng);
    const int n = len(rng);
    for (int t = 0; t < n; ++t) {
      const int item = coin(rng) < o.stay ? g * per_genre + (pos++ % per_genre) : any(rng);
      corpus::Interaction rec;
      rec.user = "u" + std::to_string(u);
      rec.item = "i" + std::to_string(item);
      rec.rating = 5.0;
      rec.timestamp = 1000 + t;
      rec.order = order++;
      log.records.push_back(rec);
    }
  }
  return log;
}

inline corpus::Corpus synthetic_corpus(const SyntheticOptions& o = {}, const std::string& type = "amazon") {
  return corpus::build_corpus(corpus::filter_kcore(synthetic_log(o), 5), "synthetic", type);
}

inline eval::CategoryMap synthetic_categories(const corpus::Corpus& c, const SyntheticOptions& o = {}) {
  eval::CategoryMap map;
  const int per_genre = o.items / o.genres;
  for (int i = 1; i <= c.num_items(); ++i) {
    const int raw = std::stoi(c.item_ids[i].substr(1));
    const int g = raw / per_genre;
    std::vector<int> labels{map.intern("g" + std::to_string(g))};
    if (raw % 10 == 0) labels.push_back(map.intern("g" + std::to_string((g + 1) % o.genres)));
    map.set(i, labels);
  }
  return map;
}

// Small model settings that keep unit tests fast.
inline TrainConfig tiny_config() {
  TrainConfig c;
  c.dim = 8;
  c.heads = 2;
  c.blocks = 1;
  c.max_len = 20;
  c.batch_size = 64;
  c.eval_batch_size = 64;
  c.max_epochs = 3;
  c.patience = 100;
  c.k = 2;
  c.lr = 5e-3;
  c.retrieve_per_interest = 10;
  return c;
}

}  // namespace sigma::testing

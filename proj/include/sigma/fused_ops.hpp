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

// Differentiable kernels with hand-written backward passes. Sequences are
// handled in packed form: the real (non-pad) positions of every sequence in a
// batch are stored as consecutive rows, delimited by `Segments`.

#include <vector>

#include "sigma/autodiff.hpp"

namespace sigma::ad {

struct Segments {
  std::vector<int> offsets{0};  // size = count + 1

  int count() const { return static_cast<int>(offsets.size()) - 1; }
  int begin(int b) const { return offsets[b]; }
  int length(int b) const { return offsets[b + 1] - offsets[b]; }
  int total() const { return offsets.back(); }
  int max_length() const;
  void push(int length) { offsets.push_back(offsets.back() + length); }
  // Row index of the last element of every segment.
  std::vector<int> last_rows() const;
};

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// Multi-head scaled dot-product attention where row i of a segment attends to
// rows j <= i of the same segment only.
Var causal_attention(const Var& q, const Var& k, const Var& v, const Segments& segs, int heads);

// Inclusive prefix sum along each segment.
Var causal_cumsum(const Var& x, const Segments& segs);

// Gated recurrent unit run independently for each of k categories over every
// segment. Row t of category j is updated only by the amount gate(t, j):
//   h_t = g * GRUCell(h_{t-1}, x_t) + (1 - g) * h_{t-1}
// With a one-hot gate this runs the cell over the subsequence of rows assigned
// to category j. Output is rows x (k * hidden), block j holding category j.
// Weight layout follows the usual (reset, update, new) split.
Var masked_gru(const Var& x, const Var& gate, const Var& w_input, const Var& w_hidden,
               const Var& b_input, const Var& b_hidden, const Segments& segs);

// Sum over rows of -log softmax(u_r . items^T / temperature)[target_r].
// Logits are produced in row chunks and never stored in full.
Var catalog_xent(const Var& u, const Var& items, const std::vector<int>& targets, double temperature);

// Like catalog_xent but the score of an item is the maximum over the k
// interest rows belonging to the same position: u has rows * k rows, position
// r owning rows [r*k, (r+1)*k).
Var max_interest_xent(const Var& u, const Var& items, const std::vector<int>& targets, int k,
                      double temperature);

// Per-row KL(N(mean, exp(logstd)^2) || N(0, I)) as a column.
Var kl_standard_rows(const Var& mean, const Var& logstd);

// Per-row diagonal Gaussian log density log N(z | mean, exp(logstd)^2).
Var gaussian_log_density_rows(const Var& z, const Var& mean, const Var& logstd);

// Per-row log sum_i w_i N(z | mean_i, exp(logstd_i)^2). Components of row r
// live in rows [r*k, (r+1)*k) of `means` / `logstds`.
Var mixture_log_density_rows(const Var& z, const Var& weights, const Var& means, const Var& logstds);

}  // namespace sigma::ad

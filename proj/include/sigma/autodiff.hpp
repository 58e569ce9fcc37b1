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

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. A graph is built eagerly by calling the free functions below on
// `Var` handles and is released when the last handle goes out of scope.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace sigma::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct Node {
  Matrix value;
  Matrix grad;  // empty until something is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  template <typename Expr>
  void accumulate(const Expr& g) {
    if (!requires_grad) return;
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  // Gradient after backward(); a zero matrix if nothing flowed here.
  Matrix grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;
  void zero_grad() const { node_->grad.resize(0, 0); }
  bool defined() const { return static_cast<bool>(node_); }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);
Var scalar(double v);

// Runs reverse accumulation from a 1x1 root.
void backward(const Var& root);

namespace detail {
extern thread_local bool grad_enabled;
// Builds a result node. If no parent requires a gradient the closure is
// dropped and the result is a constant.
Var make(Matrix value, std::vector<Var> parents, std::function<void(Node&)> fn);
}  // namespace detail

// While alive, results built on this thread record no graph.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_enabled) { detail::grad_enabled = false; }
  ~NoGradGuard() { detail::grad_enabled = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// ---- linear algebra -------------------------------------------------------
Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T

// ---- elementwise / broadcasting -------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var add_row(const Var& a, const Var& row);  // row is 1 x cols
Var mul_col(const Var& a, const Var& col);  // col is rows x 1, scales each row
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
Var abs(const Var& a);
// Gradient is zero where the input was clipped.
Var clamp(const Var& a, double lo, double hi);
Var detach(const Var& a);
// Inverted dropout; identity when p == 0 or rng is null.
Var dropout(const Var& a, double p, Rng* rng);

// ---- reductions -----------------------------------------------------------
Var sum(const Var& a);
Var row_sum(const Var& a);  // rows x 1
Var col_sum(const Var& a);  // 1 x cols

// ---- shape ----------------------------------------------------------------
Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index n);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index n);
Var gather_rows(const Var& table, const std::vector<int>& index);
// Each row repeated `times` consecutively: r0,r0,..,r1,r1,..
Var repeat_rows(const Var& a, int times);
// The whole matrix stacked `times` times.
Var tile_rows(const Var& a, int times);

// ---- row-wise normalisers -------------------------------------------------
Var softmax_rows(const Var& a);
Var l2_normalize_rows(const Var& a, double eps = 1e-12);
// Outer product per row: out[r] = vec(a[r]^T b[r]) laid out block-major, i.e.
// out(r, j*db + c) = a(r, j) * b(r, c).
Var row_outer(const Var& a, const Var& b);

// Straight-through: forward value is `hard`, gradient passes to `soft`.
Var straight_through(const Matrix& hard, const Var& soft);

// Mean softmax cross-entropy over rows with integer targets (small C only).
Var softmax_xent(const Var& logits, const std::vector<int>& targets);

// Matrix helpers.
Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev = 1.0);
Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo, double hi);

}  // namespace sigma::ad

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

#include "sigma/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sigma/errors.hpp"

namespace sigma::ad {

Matrix Var::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) throw DomainError("item() on a non-scalar");
  return node_->value(0, 0);
}

Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(n);
}

Var parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(n);
}

Var scalar(double v) { return constant(Matrix::Constant(1, 1, v)); }

void backward(const Var& root) {
  if (root.rows() != 1 || root.cols() != 1) throw DomainError("backward() needs a scalar root");
  if (!root.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{root.node(), 0}};
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

namespace detail {

thread_local bool grad_enabled = true;

Var make(Matrix value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool any = grad_enabled && std::any_of(parents.begin(), parents.end(),
                         [](const Var& v) { return v.requires_grad(); });
  if (any) {
    n->requires_grad = true;
    n->backward_fn = std::move(fn);
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.ptr());
  }
  return Var(n);
}

}  // namespace detail

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

template <typename Fwd, typename Deriv>
Var unary(const Var& a, Fwd fwd, Deriv deriv) {
  Matrix out = a.value().unaryExpr(fwd);
  return detail::make(std::move(out), {a}, [a, deriv](Node& self) {
    Matrix d = self.grad.binaryExpr(a.value(), [&](double g, double x) { return g * deriv(x); });
    a.node()->accumulate(d);
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw DomainError("matmul: inner dimension mismatch");
  Matrix out = a.value() * b.value();
  return detail::make(std::move(out), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) a.node()->accumulate(self.grad * b.value().transpose());
    if (b.requires_grad()) b.node()->accumulate(a.value().transpose() * self.grad);
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw DomainError("matmul_nt: inner dimension mismatch");
  Matrix out = a.value() * b.value().transpose();
  return detail::make(std::move(out), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) a.node()->accumulate(self.grad * b.value());
    if (b.requires_grad()) b.node()->accumulate(self.grad.transpose() * a.value());
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return detail::make(a.value() + b.value(), {a, b}, [a, b](Node& self) {
    a.node()->accumulate(self.grad);
    b.node()->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return detail::make(a.value() - b.value(), {a, b}, [a, b](Node& self) {
    a.node()->accumulate(self.grad);
    b.node()->accumulate(-self.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return detail::make(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) a.node()->accumulate(self.grad.cwiseProduct(b.value()));
    if (b.requires_grad()) b.node()->accumulate(self.grad.cwiseProduct(a.value()));
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw DomainError("add_row: bad row shape");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return detail::make(std::move(out), {a, row}, [a, row](Node& self) {
    a.node()->accumulate(self.grad);
    if (row.requires_grad()) row.node()->accumulate(self.grad.colwise().sum());
  });
}

Var mul_col(const Var& a, const Var& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw DomainError("mul_col: bad column shape");
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return detail::make(std::move(out), {a, col}, [a, col](Node& self) {
    if (a.requires_grad()) {
      Matrix d = self.grad.array().colwise() * col.value().col(0).array();
      a.node()->accumulate(d);
    }
    if (col.requires_grad()) {
      col.node()->accumulate(self.grad.cwiseProduct(a.value()).rowwise().sum());
    }
  });
}

Var scale(const Var& a, double s) {
  return detail::make(a.value() * s, {a}, [a, s](Node& self) { a.node()->accumulate(self.grad * s); });
}

Var add_scalar(const Var& a, double s) {
  Matrix out = a.value().array() + s;
  return detail::make(std::move(out), {a}, [a](Node& self) { a.node()->accumulate(self.grad); });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x) { return x > 0 ? 1.0 : 0.0; });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double x) {
                 double t = std::tanh(x);
                 return 1.0 - t * t;
               });
}

Var sigmoid(const Var& a) {
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  return unary(a, sig, [sig](double x) {
    double s = sig(x);
    return s * (1.0 - s);
  });
}

Var exp(const Var& a) {
  Matrix out = a.value().array().exp();
  Matrix saved = out;
  return detail::make(std::move(out), {a}, [a, saved](Node& self) {
    a.node()->accumulate(self.grad.cwiseProduct(saved));
  });
}

Var log(const Var& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var abs(const Var& a) {
  return unary(a, [](double x) { return std::abs(x); },
               [](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var clamp(const Var& a, double lo, double hi) {
  return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var detach(const Var& a) { return constant(a.value()); }

Var dropout(const Var& a, double p, Rng* rng) {
  if (p <= 0.0 || rng == nullptr) return a;
  if (p >= 1.0) throw DomainError("dropout: p must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(a.rows(), a.cols());
  const double inv = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? inv : 0.0;
  Matrix out = a.value().cwiseProduct(mask);
  return detail::make(std::move(out), {a}, [a, mask](Node& self) {
    a.node()->accumulate(self.grad.cwiseProduct(mask));
  });
}

Var sum(const Var& a) {
  return detail::make(Matrix::Constant(1, 1, a.value().sum()), {a}, [a](Node& self) {
    a.node()->accumulate(Matrix::Constant(a.rows(), a.cols(), self.grad(0, 0)));
  });
}

Var row_sum(const Var& a) {
  Matrix out = a.value().rowwise().sum();
  return detail::make(std::move(out), {a}, [a](Node& self) {
    Matrix d = self.grad.col(0).replicate(1, a.cols());
    a.node()->accumulate(d);
  });
}

Var col_sum(const Var& a) {
  Matrix out = a.value().colwise().sum();
  return detail::make(std::move(out), {a}, [a](Node& self) {
    Matrix d = self.grad.row(0).replicate(a.rows(), 1);
    a.node()->accumulate(d);
  });
}

Var reshape(const Var& a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) throw DomainError("reshape: size mismatch");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return detail::make(std::move(out), {a}, [a](Node& self) {
    Matrix d = Eigen::Map<const Matrix>(self.grad.data(), a.rows(), a.cols());
    a.node()->accumulate(d);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DomainError("concat_cols: no inputs");
  Eigen::Index rows = parts[0].rows(), cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DomainError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return detail::make(std::move(out), parts, [parts](Node& self) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (p.requires_grad()) p.node()->accumulate(self.grad.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || start + n > a.cols()) throw DomainError("slice_cols: out of range");
  Matrix out = a.value().middleCols(start, n);
  return detail::make(std::move(out), {a}, [a, start, n](Node& self) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    d.middleCols(start, n) = self.grad;
    a.node()->accumulate(d);
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || start + n > a.rows()) throw DomainError("slice_rows: out of range");
  Matrix out = a.value().middleRows(start, n);
  return detail::make(std::move(out), {a}, [a, start, n](Node& self) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    d.middleRows(start, n) = self.grad;
    a.node()->accumulate(d);
  });
}

Var gather_rows(const Var& table, const std::vector<int>& index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), table.cols());
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= table.rows()) throw DomainError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(index[i]);
  }
  return detail::make(std::move(out), {table}, [table, index](Node& self) {
    Matrix d = Matrix::Zero(table.rows(), table.cols());
    for (size_t i = 0; i < index.size(); ++i) d.row(index[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    table.node()->accumulate(d);
  });
}

Var repeat_rows(const Var& a, int times) {
  Matrix out(a.rows() * times, a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.middleRows(r * times, times) = a.value().row(r).replicate(times, 1);
  return detail::make(std::move(out), {a}, [a, times](Node& self) {
    Matrix d(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) d.row(r) = self.grad.middleRows(r * times, times).colwise().sum();
    a.node()->accumulate(d);
  });
}

Var tile_rows(const Var& a, int times) {
  Matrix out = a.value().replicate(times, 1);
  return detail::make(std::move(out), {a}, [a, times](Node& self) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    for (int t = 0; t < times; ++t) d += self.grad.middleRows(t * a.rows(), a.rows());
    a.node()->accumulate(d);
  });
}

Var softmax_rows(const Var& a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  Matrix saved = out;
  return detail::make(std::move(out), {a}, [a, saved](Node& self) {
    Matrix gp = self.grad.cwiseProduct(saved);
    Vector dots = gp.rowwise().sum();
    Matrix d = gp - (saved.array().colwise() * dots.array()).matrix();
    a.node()->accumulate(d);
  });
}

Var l2_normalize_rows(const Var& a, double eps) {
  Vector norms = a.value().rowwise().norm().array().max(eps);
  Matrix out = a.value().array().colwise() / norms.array();
  Matrix saved = out;
  return detail::make(std::move(out), {a}, [a, saved, norms](Node& self) {
    // d/dx (x/|x|) = (I - y y^T)/|x|
    Vector dots = self.grad.cwiseProduct(saved).rowwise().sum();
    Matrix d = self.grad - (saved.array().colwise() * dots.array()).matrix();
    d = d.array().colwise() / norms.array();
    a.node()->accumulate(d);
  });
}

Var row_outer(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw DomainError("row_outer: row mismatch");
  const Eigen::Index ka = a.cols(), db = b.cols();
  Matrix out(a.rows(), ka * db);
  for (Eigen::Index j = 0; j < ka; ++j) {
    out.middleCols(j * db, db) = b.value().array().colwise() * a.value().col(j).array();
  }
  return detail::make(std::move(out), {a, b}, [a, b, ka, db](Node& self) {
    if (a.requires_grad()) {
      Matrix da(a.rows(), ka);
      for (Eigen::Index j = 0; j < ka; ++j) {
        da.col(j) = self.grad.middleCols(j * db, db).cwiseProduct(b.value()).rowwise().sum();
      }
      a.node()->accumulate(da);
    }
    if (b.requires_grad()) {
      Matrix d = Matrix::Zero(b.rows(), db);
      for (Eigen::Index j = 0; j < ka; ++j) {
        d += (self.grad.middleCols(j * db, db).array().colwise() * a.value().col(j).array()).matrix();
      }
      b.node()->accumulate(d);
    }
  });
}

Var straight_through(const Matrix& hard, const Var& soft) {
  if (hard.rows() != soft.rows() || hard.cols() != soft.cols()) {
    throw DomainError("straight_through: shape mismatch");
  }
  return detail::make(hard, {soft}, [soft](Node& self) { soft.node()->accumulate(self.grad); });
}

Var softmax_xent(const Var& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows()) throw DomainError("softmax_xent: target count");
  const Eigen::Index n = logits.rows();
  Matrix prob = logits.value();
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    double m = prob.row(r).maxCoeff();
    prob.row(r) = (prob.row(r).array() - m).exp();
    double z = prob.row(r).sum();
    prob.row(r) /= z;
    loss += -(logits.value()(r, targets[r]) - m - std::log(z));
  }
  const double inv = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  return detail::make(Matrix::Constant(1, 1, loss * inv), {logits}, [logits, prob, targets, inv](Node& self) {
    Matrix d = prob;
    for (size_t r = 0; r < targets.size(); ++r) d(static_cast<Eigen::Index>(r), targets[r]) -= 1.0;
    logits.node()->accumulate(d * (self.grad(0, 0) * inv));
  });
}

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace sigma::ad

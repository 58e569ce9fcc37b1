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

#include "sigma/fused_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sigma/errors.hpp"

namespace sigma::ad {

namespace {
constexpr Eigen::Index kChunkRows = 256;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}
}  // namespace

int Segments::max_length() const {
  int m = 0;
  for (int b = 0; b < count(); ++b) m = std::max(m, length(b));
  return m;
}

std::vector<int> Segments::last_rows() const {
  std::vector<int> rows;
  rows.reserve(count());
  for (int b = 0; b < count(); ++b) rows.push_back(offsets[b + 1] - 1);
  return rows;
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Eigen::Index d = x.cols();
  require(gamma.cols() == d && beta.cols() == d, "layer_norm: parameter width");
  Vector mean = x.value().rowwise().mean();
  Matrix centered = x.value().colwise() - mean;
  Vector inv_std = (centered.array().square().rowwise().mean() + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();
  return detail::make(std::move(out), {x, gamma, beta}, [x, gamma, beta, xhat, inv_std](Node& self) {
    const Matrix& g = self.grad;
    if (gamma.requires_grad()) gamma.node()->accumulate(g.cwiseProduct(xhat).colwise().sum());
    if (beta.requires_grad()) beta.node()->accumulate(g.colwise().sum());
    if (x.requires_grad()) {
      Matrix dxhat = g.array().rowwise() * gamma.value().row(0).array();
      Vector m1 = dxhat.rowwise().mean();
      Vector m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
      Matrix dx = (dxhat.colwise() - m1) - (xhat.array().colwise() * m2.array()).matrix();
      dx = dx.array().colwise() * inv_std.array();
      x.node()->accumulate(dx);
    }
  });
}

Var causal_attention(const Var& q, const Var& k, const Var& v, const Segments& segs, int heads) {
  const Eigen::Index rows = q.rows(), d = q.cols();
  require(k.rows() == rows && v.rows() == rows && k.cols() == d && v.cols() == d, "causal_attention: shapes");
  require(heads > 0 && d % heads == 0, "causal_attention: width not divisible by heads");
  require(segs.total() == rows, "causal_attention: segments do not cover rows");
  const Eigen::Index dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[b * heads + h] is the (n x n) attention matrix.
  auto probs = std::make_shared<std::vector<Matrix>>(static_cast<size_t>(segs.count()) * heads);
  Matrix out = Matrix::Zero(rows, d);
  for (int b = 0; b < segs.count(); ++b) {
    const int o = segs.begin(b), n = segs.length(b);
    if (n == 0) continue;
    for (int h = 0; h < heads; ++h) {
      auto qb = q.value().block(o, h * dh, n, dh);
      auto kb = k.value().block(o, h * dh, n, dh);
      auto vb = v.value().block(o, h * dh, n, dh);
      Matrix s = (qb * kb.transpose()) * sc;
      for (int i = 0; i < n; ++i) {
        double m = s.row(i).head(i + 1).maxCoeff();
        double z = 0.0;
        for (int j = 0; j <= i; ++j) {
          s(i, j) = std::exp(s(i, j) - m);
          z += s(i, j);
        }
        for (int j = 0; j <= i; ++j) s(i, j) /= z;
        for (int j = i + 1; j < n; ++j) s(i, j) = 0.0;
      }
      out.block(o, h * dh, n, dh) = s * vb;
      (*probs)[static_cast<size_t>(b) * heads + h] = std::move(s);
    }
  }
  return detail::make(std::move(out), {q, k, v}, [q, k, v, segs, heads, dh, sc, probs](Node& self) {
    Matrix dq = Matrix::Zero(q.rows(), q.cols());
    Matrix dk = Matrix::Zero(k.rows(), k.cols());
    Matrix dv = Matrix::Zero(v.rows(), v.cols());
    for (int b = 0; b < segs.count(); ++b) {
      const int o = segs.begin(b), n = segs.length(b);
      if (n == 0) continue;
      for (int h = 0; h < heads; ++h) {
        const Matrix& p = (*probs)[static_cast<size_t>(b) * heads + h];
        auto go = self.grad.block(o, h * dh, n, dh);
        auto qb = q.value().block(o, h * dh, n, dh);
        auto kb = k.value().block(o, h * dh, n, dh);
        auto vb = v.value().block(o, h * dh, n, dh);
        dv.block(o, h * dh, n, dh) += p.transpose() * go;
        Matrix dp = go * vb.transpose();
        Vector dots = dp.cwiseProduct(p).rowwise().sum();
        Matrix ds = p.cwiseProduct(dp.colwise() - dots) * sc;
        dq.block(o, h * dh, n, dh) += ds * kb;
        dk.block(o, h * dh, n, dh) += ds.transpose() * qb;
      }
    }
    q.node()->accumulate(dq);
    k.node()->accumulate(dk);
    v.node()->accumulate(dv);
  });
}

Var causal_cumsum(const Var& x, const Segments& segs) {
  require(segs.total() == x.rows(), "causal_cumsum: segments do not cover rows");
  Matrix out = x.value();
  for (int b = 0; b < segs.count(); ++b) {
    for (int t = 1; t < segs.length(b); ++t) out.row(segs.begin(b) + t) += out.row(segs.begin(b) + t - 1);
  }
  return detail::make(std::move(out), {x}, [x, segs](Node& self) {
    Matrix d = self.grad;
    for (int b = 0; b < segs.count(); ++b) {
      for (int t = segs.length(b) - 2; t >= 0; --t) d.row(segs.begin(b) + t) += d.row(segs.begin(b) + t + 1);
    }
    x.node()->accumulate(d);
  });
}

namespace {

struct GruStep {
  std::vector<int> rows;      // packed row index per active segment
  std::vector<int> segments;  // segment index per active segment
  Matrix h_prev, reset, update, cand, hidden_proj;  // (active*k) x hidden
};

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var masked_gru(const Var& x, const Var& gate, const Var& w_input, const Var& w_hidden, const Var& b_input,
               const Var& b_hidden, const Segments& segs) {
  const Eigen::Index rows = x.rows(), k = gate.cols(), hid = w_hidden.rows();
  require(gate.rows() == rows, "masked_gru: gate rows");
  require(w_input.rows() == x.cols() && w_input.cols() == 3 * hid, "masked_gru: input weight shape");
  require(w_hidden.cols() == 3 * hid, "masked_gru: hidden weight shape");
  require(b_input.cols() == 3 * hid && b_hidden.cols() == 3 * hid, "masked_gru: bias shape");
  require(segs.total() == rows, "masked_gru: segments do not cover rows");

  Matrix xw = (x.value() * w_input.value()).rowwise() + b_input.value().row(0);
  const int nseg = segs.count();
  Matrix state = Matrix::Zero(static_cast<Eigen::Index>(nseg) * k, hid);
  Matrix out(rows, k * hid);
  auto steps = std::make_shared<std::vector<GruStep>>();
  const int max_len = segs.max_length();
  steps->reserve(max_len);

  for (int t = 0; t < max_len; ++t) {
    GruStep st;
    for (int b = 0; b < nseg; ++b) {
      if (segs.length(b) > t) {
        st.rows.push_back(segs.begin(b) + t);
        st.segments.push_back(b);
      }
    }
    const Eigen::Index na = static_cast<Eigen::Index>(st.rows.size()) * k;
    st.h_prev.resize(na, hid);
    for (size_t a = 0; a < st.rows.size(); ++a) {
      st.h_prev.middleRows(static_cast<Eigen::Index>(a) * k, k) = state.middleRows(static_cast<Eigen::Index>(st.segments[a]) * k, k);
    }
    Matrix hw = (st.h_prev * w_hidden.value()).rowwise() + b_hidden.value().row(0);
    st.reset.resize(na, hid);
    st.update.resize(na, hid);
    st.cand.resize(na, hid);
    st.hidden_proj = hw.rightCols(hid);
    for (size_t a = 0; a < st.rows.size(); ++a) {
      const int r = st.rows[a];
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index i = static_cast<Eigen::Index>(a) * k + j;
        for (Eigen::Index c = 0; c < hid; ++c) {
          double rg = sig(xw(r, c) + hw(i, c));
          double zg = sig(xw(r, hid + c) + hw(i, hid + c));
          double ng = std::tanh(xw(r, 2 * hid + c) + rg * hw(i, 2 * hid + c));
          st.reset(i, c) = rg;
          st.update(i, c) = zg;
          st.cand(i, c) = ng;
          double hp = st.h_prev(i, c);
          double cell = (1.0 - zg) * ng + zg * hp;
          double g = gate.value()(r, j);
          double h = g * cell + (1.0 - g) * hp;
          state(static_cast<Eigen::Index>(st.segments[a]) * k + j, c) = h;
          out(r, j * hid + c) = h;
        }
      }
    }
    steps->push_back(std::move(st));
  }

  return detail::make(std::move(out), {x, gate, w_input, w_hidden, b_input, b_hidden},
                      [x, gate, w_input, w_hidden, b_input, b_hidden, segs, steps, k, hid](Node& self) {
    const int nseg = segs.count();
    Matrix carry = Matrix::Zero(static_cast<Eigen::Index>(nseg) * k, hid);  // dL/dh_t from step t+1
    Matrix dxw = Matrix::Zero(x.rows(), 3 * hid);
    Matrix dgate = Matrix::Zero(gate.rows(), k);
    Matrix dwh = Matrix::Zero(w_hidden.rows(), w_hidden.cols());
    Matrix dbh = Matrix::Zero(1, 3 * hid);
    for (auto it = steps->rbegin(); it != steps->rend(); ++it) {
      const GruStep& st = *it;
      const Eigen::Index na = static_cast<Eigen::Index>(st.rows.size()) * k;
      Matrix dhw(na, 3 * hid);
      Matrix dh_prev(na, hid);
      for (size_t a = 0; a < st.rows.size(); ++a) {
        const int r = st.rows[a];
        for (Eigen::Index j = 0; j < k; ++j) {
          const Eigen::Index i = static_cast<Eigen::Index>(a) * k + j;
          const Eigen::Index si = static_cast<Eigen::Index>(st.segments[a]) * k + j;
          const double g = gate.value()(r, j);
          double dg = 0.0;
          for (Eigen::Index c = 0; c < hid; ++c) {
            const double dh = self.grad(r, j * hid + c) + carry(si, c);
            const double hp = st.h_prev(i, c), rg = st.reset(i, c), zg = st.update(i, c), ng = st.cand(i, c);
            const double cell = (1.0 - zg) * ng + zg * hp;
            dg += dh * (cell - hp);
            const double dcell = g * dh;
            double dhp = (1.0 - g) * dh + dcell * zg;
            const double dn = dcell * (1.0 - zg);
            const double dz = dcell * (hp - ng);
            const double dan = dn * (1.0 - ng * ng);
            const double dr = dan * st.hidden_proj(i, c);
            const double dar = dr * rg * (1.0 - rg);
            const double daz = dz * zg * (1.0 - zg);
            dhw(i, c) = dar;
            dhw(i, hid + c) = daz;
            dhw(i, 2 * hid + c) = dan * rg;
            dxw(r, c) += dar;
            dxw(r, hid + c) += daz;
            dxw(r, 2 * hid + c) += dan;
            dh_prev(i, c) = dhp;
          }
          dgate(r, j) += dg;
        }
      }
      dwh.noalias() += st.h_prev.transpose() * dhw;
      dbh += dhw.colwise().sum();
      dh_prev.noalias() += dhw * w_hidden.value().transpose();
      for (size_t a = 0; a < st.rows.size(); ++a) {
        carry.middleRows(static_cast<Eigen::Index>(st.segments[a]) * k, k) =
            dh_prev.middleRows(static_cast<Eigen::Index>(a) * k, k);
      }
    }
    if (w_hidden.requires_grad()) w_hidden.node()->accumulate(dwh);
    if (b_hidden.requires_grad()) b_hidden.node()->accumulate(dbh);
    if (gate.requires_grad()) gate.node()->accumulate(dgate);
    if (w_input.requires_grad()) w_input.node()->accumulate(x.value().transpose() * dxw);
    if (b_input.requires_grad()) b_input.node()->accumulate(dxw.colwise().sum());
    if (x.requires_grad()) x.node()->accumulate(dxw * w_input.value().transpose());
  });
}

Var catalog_xent(const Var& u, const Var& items, const std::vector<int>& targets, double temperature) {
  require(temperature > 0.0, "catalog_xent: temperature must be positive");
  require(u.cols() == items.cols(), "catalog_xent: width mismatch");
  require(static_cast<Eigen::Index>(targets.size()) == u.rows(), "catalog_xent: target count");
  const double inv_t = 1.0 / temperature;
  const Eigen::Index rows = u.rows(), n = items.rows();
  for (int t : targets) require(t >= 0 && t < n, "catalog_xent: target out of range");

  Vector lse(rows);
  double loss = 0.0;
  for (Eigen::Index r0 = 0; r0 < rows; r0 += kChunkRows) {
    const Eigen::Index m = std::min(kChunkRows, rows - r0);
    Matrix logits = (u.value().middleRows(r0, m) * items.value().transpose()) * inv_t;
    for (Eigen::Index i = 0; i < m; ++i) {
      double mx = logits.row(i).maxCoeff();
      lse(r0 + i) = mx + std::log((logits.row(i).array() - mx).exp().sum());
      loss += lse(r0 + i) - logits(i, targets[r0 + i]);
    }
  }
  return detail::make(Matrix::Constant(1, 1, loss), {u, items}, [u, items, targets, lse, inv_t](Node& self) {
    const double g = self.grad(0, 0);
    const Eigen::Index rows = u.rows();
    Matrix du(u.rows(), u.cols());
    Matrix ditems = Matrix::Zero(items.rows(), items.cols());
    for (Eigen::Index r0 = 0; r0 < rows; r0 += kChunkRows) {
      const Eigen::Index m = std::min(kChunkRows, rows - r0);
      Matrix ds = (u.value().middleRows(r0, m) * items.value().transpose()) * inv_t;
      for (Eigen::Index i = 0; i < m; ++i) {
        ds.row(i) = (ds.row(i).array() - lse(r0 + i)).exp();
        ds(i, targets[r0 + i]) -= 1.0;
      }
      ds *= g * inv_t;
      du.middleRows(r0, m) = ds * items.value();
      if (items.requires_grad()) ditems.noalias() += ds.transpose() * u.value().middleRows(r0, m);
    }
    u.node()->accumulate(du);
    if (items.requires_grad()) items.node()->accumulate(ditems);
  });
}

Var max_interest_xent(const Var& u, const Var& items, const std::vector<int>& targets, int k, double temperature) {
  require(temperature > 0.0, "max_interest_xent: temperature must be positive");
  require(k >= 1, "max_interest_xent: k must be >= 1");
  require(u.cols() == items.cols(), "max_interest_xent: width mismatch");
  const Eigen::Index positions = static_cast<Eigen::Index>(targets.size());
  require(u.rows() == positions * k, "max_interest_xent: expected targets.size() * k interest rows");
  const Eigen::Index n = items.rows();
  for (int t : targets) require(t >= 0 && t < n, "max_interest_xent: target out of range");
  const double inv_t = 1.0 / temperature;
  const Eigen::Index chunk = std::max<Eigen::Index>(1, kChunkRows / k);

  // Scores for rows [p0, p0+m): max over interests plus which interest won.
  auto scores = [u, items, k, inv_t](Eigen::Index p0, Eigen::Index m, Matrix& best, Eigen::MatrixXi& arg) {
    const Eigen::Index n = items.rows();
    best.setConstant(m, n, -std::numeric_limits<double>::infinity());
    arg.setZero(m, n);
    for (int j = 0; j < k; ++j) {
      Matrix uj(m, u.cols());
      for (Eigen::Index i = 0; i < m; ++i) uj.row(i) = u.value().row((p0 + i) * k + j);
      Matrix s = (uj * items.value().transpose()) * inv_t;
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index c = 0; c < n; ++c) {
          if (s(i, c) > best(i, c)) {
            best(i, c) = s(i, c);
            arg(i, c) = j;
          }
        }
      }
    }
  };

  Vector lse(positions);
  double loss = 0.0;
  Matrix best;
  Eigen::MatrixXi arg;
  for (Eigen::Index p0 = 0; p0 < positions; p0 += chunk) {
    const Eigen::Index m = std::min(chunk, positions - p0);
    scores(p0, m, best, arg);
    for (Eigen::Index i = 0; i < m; ++i) {
      double mx = best.row(i).maxCoeff();
      lse(p0 + i) = mx + std::log((best.row(i).array() - mx).exp().sum());
      loss += lse(p0 + i) - best(i, targets[p0 + i]);
    }
  }
  return detail::make(Matrix::Constant(1, 1, loss), {u, items},
                      [u, items, targets, lse, k, inv_t, chunk, scores](Node& self) {
    const double g = self.grad(0, 0);
    const Eigen::Index positions = static_cast<Eigen::Index>(targets.size());
    Matrix du = Matrix::Zero(u.rows(), u.cols());
    Matrix ditems = Matrix::Zero(items.rows(), items.cols());
    Matrix best;
    Eigen::MatrixXi arg;
    for (Eigen::Index p0 = 0; p0 < positions; p0 += chunk) {
      const Eigen::Index m = std::min(chunk, positions - p0);
      scores(p0, m, best, arg);
      for (Eigen::Index i = 0; i < m; ++i) {
        best.row(i) = (best.row(i).array() - lse(p0 + i)).exp();
        best(i, targets[p0 + i]) -= 1.0;
      }
      best *= g * inv_t;
      for (int j = 0; j < k; ++j) {
        Matrix masked = (arg.array() == j).cast<double>().matrix().cwiseProduct(best);
        Matrix uj(m, u.cols());
        for (Eigen::Index i = 0; i < m; ++i) uj.row(i) = u.value().row((p0 + i) * k + j);
        Matrix duj = masked * items.value();
        for (Eigen::Index i = 0; i < m; ++i) du.row((p0 + i) * k + j) += duj.row(i);
        if (items.requires_grad()) ditems.noalias() += masked.transpose() * uj;
      }
    }
    u.node()->accumulate(du);
    if (items.requires_grad()) items.node()->accumulate(ditems);
  });
}

Var kl_standard_rows(const Var& mean, const Var& logstd) {
  require(mean.rows() == logstd.rows() && mean.cols() == logstd.cols(), "kl_standard_rows: shapes");
  Matrix var = (2.0 * logstd.value().array()).exp();
  Matrix per = 0.5 * (var.array() + mean.value().array().square() - 1.0 - 2.0 * logstd.value().array());
  Matrix out = per.rowwise().sum();
  return detail::make(std::move(out), {mean, logstd}, [mean, logstd, var](Node& self) {
    const auto g = self.grad.col(0).array();
    if (mean.requires_grad()) mean.node()->accumulate((mean.value().array().colwise() * g).matrix());
    if (logstd.requires_grad()) logstd.node()->accumulate(((var.array() - 1.0).colwise() * g).matrix());
  });
}

Var gaussian_log_density_rows(const Var& z, const Var& mean, const Var& logstd) {
  require(z.rows() == mean.rows() && z.cols() == mean.cols(), "gaussian_log_density_rows: z/mean shapes");
  require(logstd.rows() == mean.rows() && logstd.cols() == mean.cols(), "gaussian_log_density_rows: logstd shape");
  Matrix inv_var = (-2.0 * logstd.value().array()).exp();
  Matrix diff = z.value() - mean.value();
  Matrix per = -kHalfLog2Pi - logstd.value().array() - 0.5 * diff.array().square() * inv_var.array();
  Matrix out = per.rowwise().sum();
  return detail::make(std::move(out), {z, mean, logstd}, [z, mean, logstd, inv_var, diff](Node& self) {
    const auto g = self.grad.col(0).array();
    Matrix w = (diff.array() * inv_var.array()).colwise() * g;
    if (z.requires_grad()) z.node()->accumulate(-w);
    if (mean.requires_grad()) mean.node()->accumulate(w);
    if (logstd.requires_grad()) {
      Matrix dl = ((diff.array().square() * inv_var.array() - 1.0).colwise() * g).matrix();
      logstd.node()->accumulate(dl);
    }
  });
}

Var mixture_log_density_rows(const Var& z, const Var& weights, const Var& means, const Var& logstds) {
  const Eigen::Index rows = z.rows(), d = z.cols(), k = weights.cols();
  require(weights.rows() == rows, "mixture_log_density_rows: weight rows");
  require(means.rows() == rows * k && means.cols() == d, "mixture_log_density_rows: means shape");
  require(logstds.rows() == rows * k && logstds.cols() == d, "mixture_log_density_rows: logstds shape");
  require((weights.value().array() >= 0.0).all(), "mixture_log_density_rows: negative mixture weight");

  Matrix comp_log(rows, k);  // log N_i(z)
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index i = r * k + j;
      auto diff = (z.value().row(r) - means.value().row(i)).array();
      auto ls = logstds.value().row(i).array();
      comp_log(r, j) = (-kHalfLog2Pi - ls - 0.5 * diff.square() * (-2.0 * ls).exp()).sum();
    }
  }
  Vector lse(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (weights.value()(r, j) > 0) mx = std::max(mx, std::log(weights.value()(r, j)) + comp_log(r, j));
    }
    require(std::isfinite(mx), "mixture_log_density_rows: all weights are zero");
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (weights.value()(r, j) > 0) s += std::exp(std::log(weights.value()(r, j)) + comp_log(r, j) - mx);
    }
    lse(r) = mx + std::log(s);
  }
  Matrix out = lse;
  return detail::make(std::move(out), {z, weights, means, logstds},
                      [z, weights, means, logstds, comp_log, lse, k, d](Node& self) {
    const Eigen::Index rows = z.rows();
    Matrix dz = Matrix::Zero(rows, d);
    Matrix dw = Matrix::Zero(rows, k);
    Matrix dm = Matrix::Zero(rows * k, d);
    Matrix dl = Matrix::Zero(rows * k, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double g = self.grad(r, 0);
      for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index i = r * k + j;
        const double ratio = std::exp(comp_log(r, j) - lse(r));  // N_i / mixture
        dw(r, j) = g * ratio;
        const double resp = weights.value()(r, j) * ratio;
        if (resp == 0.0) continue;
        Eigen::ArrayXd inv_var = (-2.0 * logstds.value().row(i).array()).exp().transpose();
        Eigen::ArrayXd diff = (z.value().row(r) - means.value().row(i)).array().transpose();
        Eigen::ArrayXd w = diff * inv_var;
        dz.row(r) -= (g * resp * w).matrix().transpose();
        dm.row(i) = (g * resp * w).matrix().transpose();
        dl.row(i) = (g * resp * (diff.square() * inv_var - 1.0)).matrix().transpose();
      }
    }
    if (z.requires_grad()) z.node()->accumulate(dz);
    if (weights.requires_grad()) weights.node()->accumulate(dw);
    if (means.requires_grad()) means.node()->accumulate(dm);
    if (logstds.requires_grad()) logstds.node()->accumulate(dl);
  });
}

}  // namespace sigma::ad

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

#include "sigma/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigma/errors.hpp"

namespace sigma::gaussian {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;

void check_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) throw DomainError(std::string(what) + ": dimension mismatch");
}
}  // namespace

DiagGaussian DiagGaussian::from_log_std(VectorXd mean, const VectorXd& log_std) {
  check_dim(mean.size(), log_std.size(), "from_log_std");
  VectorXd std = log_std.array().max(kLogStdMin).min(kLogStdMax).exp();
  return DiagGaussian{std::move(mean), std::move(std)};
}

DiagGaussian DiagGaussian::standard(Eigen::Index dim) {
  return DiagGaussian{VectorXd::Zero(dim), VectorXd::Ones(dim)};
}

void validate(const DiagGaussian& q) {
  if (q.mean.size() == 0) throw DomainError("gaussian: empty dimension");
  check_dim(q.mean.size(), q.std.size(), "gaussian");
  if (!(q.std.array() > 0.0).all()) throw DomainError("gaussian: std must be strictly positive");
}

void validate(const GaussianMixture& p) {
  if (p.weights.size() == 0 || static_cast<size_t>(p.weights.size()) != p.components.size()) {
    throw DomainError("mixture: weight/component count mismatch");
  }
  if ((p.weights.array() < 0.0).any()) throw DomainError("mixture: negative weight");
  if (std::abs(p.weights.sum() - 1.0) > 1e-6) throw DomainError("mixture: weights must sum to 1");
  for (const auto& c : p.components) {
    validate(c);
    check_dim(c.dim(), p.components.front().dim(), "mixture");
  }
}

double kl_to_standard(const DiagGaussian& q) {
  validate(q);
  const auto var = q.std.array().square();
  return 0.5 * (var + q.mean.array().square() - 1.0 - var.log()).sum();
}

double log_density(const VectorXd& x, const DiagGaussian& q) {
  validate(q);
  check_dim(x.size(), q.dim(), "log_density");
  const auto z = (x - q.mean).array() / q.std.array();
  return (-kHalfLog2Pi - q.std.array().log() - 0.5 * z.square()).sum();
}

double log_density_mixture(const VectorXd& x, const GaussianMixture& p) {
  validate(p);
  double mx = -std::numeric_limits<double>::infinity();
  VectorXd terms(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    terms(i) = p.weights(i) > 0.0 ? std::log(p.weights(i)) + log_density(x, p.components[i])
                                   : -std::numeric_limits<double>::infinity();
    mx = std::max(mx, terms(i));
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (std::isfinite(terms(i))) s += std::exp(terms(i) - mx);
  }
  return mx + std::log(s);
}

VectorXd reparameterize(const DiagGaussian& q, const VectorXd& noise) {
  check_dim(noise.size(), q.dim(), "reparameterize");
  check_dim(q.std.size(), q.dim(), "reparameterize");
  return q.mean + q.std.cwiseProduct(noise);
}

VectorXd standard_normal(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = n(rng);
  return v;
}

VectorXd uniform_open(Eigen::Index dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = u(rng);
  return v;
}

VectorXd gumbel_softmax(const VectorXd& logits, double temperature, const VectorXd& noise) {
  if (!(temperature > 0.0)) throw DomainError("gumbel_softmax: temperature must be positive");
  check_dim(logits.size(), noise.size(), "gumbel_softmax");
  VectorXd u = noise.array().max(kGumbelClip).min(1.0 - kGumbelClip);
  VectorXd y = (logits.array() - (-u.array().log()).log()) / temperature;
  y = (y.array() - y.maxCoeff()).exp();
  return y / y.sum();
}

HardSample gumbel_softmax_hard(const VectorXd& logits, double temperature, const VectorXd& noise) {
  HardSample s;
  s.soft = gumbel_softmax(logits, temperature, noise);
  s.soft.maxCoeff(&s.index);
  s.hard = VectorXd::Zero(s.soft.size());
  s.hard(s.index) = 1.0;
  return s;
}

double mc_kl(const DiagGaussian& q, const GaussianMixture& p, int n, std::mt19937_64& rng) {
  if (n < 1) throw DomainError("mc_kl: n must be >= 1");
  validate(q);
  validate(p);
  double acc = 0.0;
  for (int s = 0; s < n; ++s) {
    VectorXd z = reparameterize(q, standard_normal(q.dim(), rng));
    acc += log_density(z, q) - log_density_mixture(z, p);
  }
  return acc / n;
}

double kl_between(const DiagGaussian& q, const DiagGaussian& p) {
  validate(q);
  validate(p);
  check_dim(q.dim(), p.dim(), "kl_between");
  const auto vq = q.std.array().square(), vp = p.std.array().square();
  return 0.5 * ((vq / vp) + (q.mean - p.mean).array().square() / vp - 1.0 + (vp / vq).log()).sum();
}

}  // namespace sigma::gaussian

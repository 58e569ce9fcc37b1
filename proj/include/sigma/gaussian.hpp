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

// Diagonal Gaussian and Gaussian-mixture primitives shared by both VAEs, plus
// Monte-Carlo estimators used as independent test oracles. Everything here is
// pure given explicit noise; callers own the random streams.

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace sigma::gaussian {

using Eigen::VectorXd;

// Networks emit log-std which is clamped to this range before exponentiation.
inline constexpr double kLogStdMin = -6.0;
inline constexpr double kLogStdMax = 2.0;
// Uniform noise is kept this far away from 0 and 1 before the double log.
inline constexpr double kGumbelClip = 1e-10;

struct DiagGaussian {
  VectorXd mean;
  VectorXd std;

  Eigen::Index dim() const { return mean.size(); }
  // Builds from an unconstrained log-std with clamping applied.
  static DiagGaussian from_log_std(VectorXd mean, const VectorXd& log_std);
  static DiagGaussian standard(Eigen::Index dim);
};

struct GaussianMixture {
  VectorXd weights;
  std::vector<DiagGaussian> components;

  Eigen::Index size() const { return weights.size(); }
};

// Throws DomainError on empty/mismatched/non-positive std.
void validate(const DiagGaussian& q);
// Throws DomainError on negative weights, |sum - 1| > 1e-6 or bad components.
void validate(const GaussianMixture& p);

// 0.5 * sum_j (std_j^2 + mean_j^2 - 1 - log std_j^2)
double kl_to_standard(const DiagGaussian& q);
double log_density(const VectorXd& x, const DiagGaussian& q);
// Log-sum-exp over log w_i + log N_i(x).
double log_density_mixture(const VectorXd& x, const GaussianMixture& p);
// mean + std * noise
VectorXd reparameterize(const DiagGaussian& q, const VectorXd& noise);

VectorXd standard_normal(Eigen::Index dim, std::mt19937_64& rng);
VectorXd uniform_open(Eigen::Index dim, std::mt19937_64& rng);

// softmax((logits + g) / temperature), g = -log(-log(noise)).
VectorXd gumbel_softmax(const VectorXd& logits, double temperature, const VectorXd& noise);

struct HardSample {
  VectorXd soft;    // relaxed sample
  VectorXd hard;    // one-hot of argmax(soft)
  Eigen::Index index;
};
HardSample gumbel_softmax_hard(const VectorXd& logits, double temperature, const VectorXd& noise);

// (1/n) sum_s [log q(z_s) - log p(z_s)], z_s = reparameterize(q, eps_s).
double mc_kl(const DiagGaussian& q, const GaussianMixture& p, int n, std::mt19937_64& rng);

// Closed-form KL between two diagonal Gaussians; used to cross-check the
// Monte-Carlo estimators.
double kl_between(const DiagGaussian& q, const DiagGaussian& p);

}  // namespace sigma::gaussian

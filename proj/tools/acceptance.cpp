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

// Acceptance suite. Prints one PASS/FAIL line per criterion. The property
// group needs no external data; the Office group reads the interaction log
// named by SIGMA_OFFICE_PATH and reports FAIL when it is absent.
//
// Exit status: 0 when every selected criterion passes, 1 on any failure, 77
// when the only failures are Office criteria without data.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigma/config.hpp"
#include "sigma/evaluate.hpp"
#include "sigma/gaussian.hpp"
#include "sigma/interest.hpp"
#include "sigma/sequence.hpp"
#include "sigma/trainer.hpp"
#include "support/testing.hpp"

namespace {

using namespace sigma;
using ad::Matrix;
using ad::Rng;
using ad::Var;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kKlAbsTol = 0.01;
constexpr double kKlRelTol = 0.02;
constexpr double kKlSeconds = 60.0;
constexpr int kKlSamples = 100000;
constexpr double kGumbelTol = 0.02;
constexpr int kGumbelDraws = 100000;
constexpr double kGumbelSeconds = 60.0;
constexpr double kCollapseTol = 0.02;
constexpr int kCollapseResamples = 10000;
constexpr double kGradTol = 1e-3;
constexpr int kStructuralBatches = 50;
constexpr double kSimplexTol = 1e-9;
constexpr double kCausalTol = 1e-12;

constexpr double kOfficeRecall = 0.12;
constexpr double kOfficeNdcgMargin = 0.15;
constexpr int kOfficeSeeds = 3;
constexpr int kOfficeOrthWins = 2;
constexpr int kSkip = 77;

struct Outcome {
  bool pass;
  std::string detail;
  bool missing_data = false;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

gaussian::DiagGaussian random_gaussian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> mean(0.0, 1.0);
  std::uniform_real_distribution<double> log_std(-1.0, 0.7);
  gaussian::DiagGaussian q{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (int i = 0; i < d; ++i) {
    q.mean(i) = mean(rng);
    q.std(i) = std::exp(log_std(rng));
  }
  return q;
}

Outcome kl_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    gaussian::DiagGaussian q = random_gaussian(1 + i % 16, rng);
    gaussian::GaussianMixture standard{Eigen::VectorXd::Ones(1), {gaussian::DiagGaussian::standard(q.dim())}};
    const double closed = gaussian::kl_to_standard(q);
    const double mc = gaussian::mc_kl(q, standard, kKlSamples, rng);
    const double tol = std::max(kKlAbsTol, kKlRelTol * closed);
    worst = std::max(worst, std::abs(closed - mc) / tol);
    if (std::abs(closed - mc) > tol) ++failures;
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < kKlSeconds,
          fmt("100 Gaussians, d<=16, n=1e5: %.0f outside max(0.01, 2%%), worst |err|/tol %.3f, %.1fs", failures,
              worst, secs)};
}

Outcome gumbel_calibration() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> logit(0.0, 1.0);
  double worst = 0.0;
  for (int v = 0; v < 20; ++v) {
    const int k = 2 + v % 15;
    Eigen::VectorXd logits(k);
    for (int j = 0; j < k; ++j) logits(j) = logit(rng);
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    p /= p.sum();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < kGumbelDraws; ++i) {
      counts(gaussian::gumbel_softmax_hard(logits, 0.5, gaussian::uniform_open(k, rng)).index) += 1.0;
    }
    worst = std::max(worst, (counts / kGumbelDraws - p).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(start);
  return {worst <= kGumbelTol && secs < kGumbelSeconds,
          fmt("20 logit vectors, k<=16, 1e5 draws: max |freq - p| %.4f (tol 0.02), %.1fs", worst, secs)};
}

Outcome mixture_collapse() {
  Rng rng(1003);
  double worst = 0.0;
  for (int k : {1, 3}) {
    const int n = kCollapseResamples, d = 8;
    Matrix mu = ad::normal_matrix(1, d, rng), ls = ad::uniform_matrix(1, d, rng, -1.0, 0.5);
    Matrix mus = mu.replicate(n, 1), lss = ls.replicate(n, 1);
    Matrix z = mus + lss.array().exp().matrix().cwiseProduct(ad::normal_matrix(n, d, rng));
    Matrix w = ad::uniform_matrix(1, k, rng, 0.1, 1.0);
    w /= w.sum();
    sequence::SequencePosterior post{ad::constant(mus), ad::constant(lss)};
    sequence::MixturePrior prior{ad::constant(w.replicate(n, 1)), ad::constant(mu.replicate(n * k, 1)),
                                 ad::constant(ls.replicate(n * k, 1))};
    worst = std::max(worst, std::abs(sequence::sgm_kl(ad::constant(z), post, prior).item() / n));
  }
  return {worst <= kCollapseTol, fmt("prior == posterior (k=1 and k=3), 1e4 resamples: max |mean| %.5f (tol 0.02)",
                                     worst)};
}

Outcome gradient_checks() {
  Rng rng(1004);
  nn::ParameterStore bank_store, store;
  interest::CategoryBank bank = interest::CategoryBank::create(bank_store, 2, 4, 0.1, rng);
  const double orth = testing::gradient_error(bank.embeddings, [&] { return interest::orthogonality_loss(bank); });

  interest::MieOptions mo;
  mo.dim = 4;
  mo.k = 2;
  mo.tau_cat = 0.5;
  mo.straight_through = false;
  interest::MieVae mie(store, mo, rng);
  Var table = ad::parameter(ad::normal_matrix(6, 4, rng));
  PackedBatch batch = testing::random_training_batch(rng, 3, 5, 5);
  std::vector<int> targets;
  for (int t : batch.targets) targets.push_back(t - 1);
  const double mie_recon = testing::gradient_error(table, [&] {
    Rng noise(7);
    auto out = mie.forward(table, batch, &noise);
    return interest::mie_recon_loss(out.samples, targets, ad::slice_rows(table, 1, 5), mo.eps_score);
  });

  sequence::SgmOptions so;
  so.dim = 4;
  so.heads = 2;
  so.blocks = 1;
  so.max_len = 10;
  so.dropout = 0.0;
  Var items = store.add("items", ad::normal_matrix(6, 4, rng, 0.5));
  sequence::SgmVae sgm(store, items, so, rng);
  const double sgm_recon = testing::gradient_error(items, [&] {
    auto post = sgm.encode_posterior(batch, nullptr);
    return sequence::sgm_recon_loss(sgm.decode(sgm.sample(post, nullptr), batch.segs, nullptr), sgm.catalog(),
                                    targets);
  });
  const double worst = std::max({orth, mie_recon, sgm_recon});
  return {worst < kGradTol, fmt("d=4, k=2: relative error orth %.2e, mie_recon %.2e, sgm_recon %.2e (tol 1e-3)", orth,
                                mie_recon, sgm_recon)};
}

Outcome structural_invariants() {
  Rng rng(1005);
  nn::ParameterStore store;
  const int items = 25, d = 8, k = 3;
  Var table = store.add("items", ad::normal_matrix(items + 1, d, rng, 0.5));
  sequence::SgmOptions so;
  so.dim = d;
  so.heads = 2;
  so.blocks = 2;
  so.max_len = 40;
  sequence::SgmVae sgm(store, table, so, rng);
  interest::MieOptions mo;
  mo.dim = d;
  mo.k = k;
  interest::MieVae mie(store, mo, rng);

  int causal = 0, padding = 0, length = 0, simplex = 0;
  ad::NoGradGuard no_grad;
  for (int b = 0; b < kStructuralBatches; ++b) {
    auto histories = testing::random_histories(rng, 4, 15, items, 2);
    auto means = [&](const std::vector<std::vector<int>>& hs, int max_len) {
      return sgm.encode_posterior(pack(corpus::make_history_batch(hs, max_len)), nullptr).mean.value();
    };
    Matrix base = means(histories, 20);

    auto perturbed = histories;
    std::vector<int> keep;
    for (size_t u = 0; u < perturbed.size(); ++u) {
      const size_t cut = perturbed[u].size() / 2;
      keep.push_back(static_cast<int>(cut));
      for (size_t t = cut; t < perturbed[u].size(); ++t) perturbed[u][t] = 1 + (perturbed[u][t] % items);
    }
    Matrix other = means(perturbed, 20);
    bool ok = true;
    int row = 0;
    for (size_t u = 0; u < histories.size(); ++u) {
      for (int t = 0; t < keep[u]; ++t) ok = ok && (base.row(row + t) - other.row(row + t)).cwiseAbs().maxCoeff() < kCausalTol;
      row += static_cast<int>(histories[u].size());
    }
    causal += ok;

    padding += (base - means(histories, 40)).cwiseAbs().maxCoeff() < kCausalTol;

    PackedBatch batch = pack(corpus::make_history_batch(histories, 20));
    Rng noise(b);
    auto out = mie.forward(table, batch, &noise);
    bool conserved = true;
    for (int s = 0; s < batch.segs.count(); ++s) {
      const int o = batch.segs.begin(s), n = batch.segs.length(s);
      std::vector<int> ids(batch.ids.begin() + o, batch.ids.begin() + o + n);
      auto subs = interest::split_subsequences(ids, out.assign.onehot.middleRows(o, n));
      size_t total = 0;
      for (const auto& sub : subs) total += sub.size();
      conserved = conserved && static_cast<int>(total) == n && static_cast<int>(subs.size()) == k;
    }
    length += conserved;

    bool on_simplex = true;
    for (const Matrix* m : {&out.probs.value(), &out.soft.alpha.value()}) {
      on_simplex = on_simplex && m->minCoeff() >= 0.0 &&
                   (m->rowwise().sum().array() - 1.0).abs().maxCoeff() < kSimplexTol;
    }
    simplex += on_simplex;
  }
  const int n = kStructuralBatches;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d random batches: causal %d, front-padding %d, length conservation %d, simplex %d",
                n, causal, padding, length, simplex);
  return {causal == n && padding == n && length == n && simplex == n, buf};
}

Outcome diversity_and_sweep() {
  eval::CategoryMap map;
  const int a = map.intern("a"), b = map.intern("b"), c = map.intern("c");
  map.set(1, {a});
  map.set(2, {a, b});
  map.set(3, {a});
  map.set(4, {b});
  map.set(5, {c});
  auto list = [](std::vector<int> items) {
    eval::RankedList r;
    r.items = std::move(items);
    r.scores.assign(r.items.size(), 0.0);
    return r;
  };
  const double same = eval::diversity_at_k({list({1, 2, 3})}, map, 3);
  const double disjoint = eval::diversity_at_k({list({1, 4, 5})}, map, 3);
  const double mixed = eval::diversity_at_k({list({1, 3, 4})}, map, 3);
  const bool examples = same == 0.0 && disjoint == 1.0 && mixed == 2.0 / 3.0;

  corpus::Corpus corpus = testing::synthetic_corpus();
  eval::CategoryMap genres = testing::synthetic_categories(corpus);
  std::vector<eval::MetricRow> rows;
  const std::vector<double> grid{0.01, 0.001, 0.0001};
  for (double lambda : grid) {
    TrainConfig cfg = testing::tiny_config();
    cfg.max_epochs = 2;
    cfg.lambda = lambda;
    train::TrainOptions opts;
    opts.seed = 11;
    auto result = train::train(cfg, corpus, opts);
    auto r = eval::evaluate(*result.model, corpus, {20}, &genres, {corpus.name, "full", lambda, cfg.k, 11});
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const std::string table = eval::format_lambda_sweep(rows, 20, testing::tiny_config().k);
  std::istringstream in(table);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  bool format = lines.size() == 1 + grid.size() && lines[0].find("Recall@20") != std::string::npos &&
                lines[0].find("Diversity@20") != std::string::npos;
  for (size_t i = 0; format && i < grid.size(); ++i) format = lines[i + 1].find('-') == std::string::npos;
  std::cout << table;
  return {examples && format, fmt("diversity examples %.0f / %.0f / %.4f; lambda sweep table on a genre-labelled corpus",
                                  same, disjoint, mixed)};
}

Outcome determinism() {
  corpus::Corpus corpus = testing::synthetic_corpus();
  TrainConfig cfg = testing::tiny_config();
  cfg.max_epochs = 3;
  train::TrainOptions opts;
  opts.seed = 21;
  auto run = [&] {
    auto r = train::train(cfg, corpus, opts);
    auto rows = eval::evaluate(*r.model, corpus, {20, 40}, nullptr, {corpus.name, "full", cfg.lambda, cfg.k, 21});
    return std::make_pair(std::move(r.history), rows);
  };
  auto [ha, ra] = run();
  auto [hb, rb] = run();
  bool losses = ha.size() == 3 && hb.size() == 3;
  for (size_t e = 0; losses && e < 3; ++e) losses = ha[e].losses == hb[e].losses;
  bool evals = ra.size() == rb.size();
  for (size_t i = 0; evals && i < ra.size(); ++i) evals = ra[i].value == rb[i].value;
  return {losses && evals, std::string("epochs 0-2 losses ") + (losses ? "bitwise equal" : "differ") +
                               ", final evaluation " + (evals ? "identical" : "differs")};
}

struct OfficeRun {
  std::vector<eval::MetricRow> rows;
};

class Office {
 public:
  Office() {
    const char* path = std::getenv("SIGMA_OFFICE_PATH");
    if (!path || !*path || !std::filesystem::exists(path)) return;
    auto log = corpus::filter_kcore(corpus::load_interactions(path, std::nullopt), 5);
    corpus_ = corpus::build_corpus(log, "office", "amazon");
    if (const char* cfg = std::getenv("SIGMA_OFFICE_CONFIG"); cfg && *cfg) base_ = load_config(cfg).train;
    available_ = true;
  }

  bool available() const { return available_; }

  const std::vector<eval::MetricRow>& run(const std::string& variant, std::uint64_t seed) {
    const std::string key = variant + "#" + std::to_string(seed);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    TrainConfig cfg = build_variant(variant, base_);
    train::TrainOptions opts;
    opts.seed = seed;
    opts.progress = &std::cerr;
    auto result = train::train(cfg, corpus_, opts);
    auto rows = eval::evaluate(*result.model, corpus_, {20, 40}, nullptr,
                               {corpus_.name, parse_variant(variant).label(), cfg.lambda, result.model->k(), seed});
    return cache_.emplace(key, std::move(rows)).first->second;
  }

 private:
  bool available_ = false;
  corpus::Corpus corpus_;
  TrainConfig base_;
  std::map<std::string, std::vector<eval::MetricRow>> cache_;
};

Office& office() {
  static Office o;
  return o;
}

Outcome missing_office() {
  return {false, "Office interaction log unavailable (set SIGMA_OFFICE_PATH)", true};
}

Outcome office_end_to_end() {
  if (!office().available()) return missing_office();
  const auto& full = office().run("full", 42);
  const auto& small = office().run("uni_prior(0.0001)", 42);
  const auto& one = office().run("uni_prior(1)", 42);
  const double r20 = eval::metric_value(full, "recall", 20);
  bool ordered = true;
  for (const char* m : {"recall", "ndcg"}) {
    const double f = eval::metric_value(full, m, 40), s = eval::metric_value(small, m, 40),
                 o = eval::metric_value(one, m, 40);
    ordered = ordered && f > s && s > o;
  }
  const double n_full = eval::metric_value(full, "ndcg", 40), n_one = eval::metric_value(one, "ndcg", 40);
  const double margin = n_one > 0.0 ? n_full / n_one - 1.0 : 0.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Recall@20 %.4f (need >= 0.12); R@40/N@40 ordering full > uni(1e-4) > uni(1) %s; "
                "NDCG@40 gain over uni(1) %.1f%% (need >= 15%%)",
                r20, ordered ? "holds" : "violated", 100.0 * margin);
  return {r20 >= kOfficeRecall && ordered && margin >= kOfficeNdcgMargin, buf};
}

Outcome office_orthogonality() {
  if (!office().available()) return missing_office();
  int wins = 0;
  for (int s = 0; s < kOfficeSeeds; ++s) {
    const std::uint64_t seed = 42 + s;
    wins += eval::metric_value(office().run("no_orth", seed), "ndcg", 20) <
            eval::metric_value(office().run("full", seed), "ndcg", 20);
  }
  return {wins >= kOfficeOrthWins, fmt("no_orth below full on NDCG@20 for %.0f of 3 seeds (need 2)", wins)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance suite");
  std::string group = "all";
  app.add_option("--group", group, "criteria to run")->check(CLI::IsMember({"all", "properties", "office"}));
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    const char* name;
    const char* group;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"distribution-math oracle", "properties", kl_oracle},
      {"gumbel-softmax calibration", "properties", gumbel_calibration},
      {"mixture-KL collapse", "properties", mixture_collapse},
      {"gradient checks", "properties", gradient_checks},
      {"structural invariants", "properties", structural_invariants},
      {"office end-to-end", "office", office_end_to_end},
      {"office orthogonality ablation", "office", office_orthogonality},
      {"diversity metric", "properties", diversity_and_sweep},
      {"determinism", "properties", determinism},
  };
  int failed = 0, missing = 0;
  for (const auto& c : criteria) {
    if (group != "all" && group != c.group) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << o.detail << std::endl;
    if (!o.pass) (o.missing_data ? missing : failed) += 1;
  }
  if (failed > 0) return 1;
  return missing > 0 ? kSkip : 0;
}

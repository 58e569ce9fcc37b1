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

#include "sigma/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>

#include "sigma/config.hpp"
#include "sigma/corpus.hpp"
#include "sigma/errors.hpp"
#include "sigma/evaluate.hpp"
#include "sigma/trainer.hpp"

namespace sigma::cli {

namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string device = "cpu";
  bool force = false;
  // prepare
  std::string input;
  std::string dataset;
  // evaluate / recommend
  std::string checkpoint;
  std::string user;
  int top_k = 20;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--set", f.overrides, "override a config value, e.g. train.k=8")->take_all();
  cmd->add_option("--device", f.device, "compute device (cpu)");
  cmd->add_flag("--force", f.force, "accept mismatched artifacts");
}

ExperimentConfig resolve_config(const Flags& f, const std::string& command) {
  json j = to_json(ExperimentConfig{});
  if (!f.config.empty()) {
    // Validates strictly and fills defaults before the flags are layered on.
    j = to_json(load_config(f.config));
  }
  if (f.seed) j["seed"] = *f.seed;
  if (!f.out_dir.empty()) j["output_dir"] = f.out_dir;
  if (command == "prepare") {
    if (!f.input.empty()) j["dataset"]["path"] = f.input;
    if (!f.dataset.empty()) j["dataset"]["type"] = f.dataset;
  }
  if (!f.checkpoint.empty()) j["eval"]["checkpoint"] = f.checkpoint;
  for (const auto& o : f.overrides) apply_override(j, o);
  if (f.device != "cpu") throw ConfigError("unsupported device '" + f.device + "' (only cpu is available)");
  return config_from_json(j);
}

corpus::Corpus require_corpus(const ExperimentConfig& cfg) {
  const auto path = cfg.corpus_path();
  if (!std::filesystem::exists(path)) {
    throw DataError("corpus artifact " + path.string() + " not found; run `prepare` first");
  }
  return corpus::load_corpus(path);
}

std::unique_ptr<SigmaModel> require_model(const ExperimentConfig& cfg, const corpus::Corpus& corpus, bool force,
                                          train::CheckpointInfo& info) {
  const auto path = cfg.checkpoint_path();
  if (!std::filesystem::exists(path)) {
    throw DataError("checkpoint " + path.string() + " not found; run `train` first");
  }
  auto model = train::load_checkpoint(path, &info);
  if (!force) {
    if (info.corpus_hash != corpus.hash) {
      throw DataError("checkpoint was trained on a different corpus (hash " + info.corpus_hash + " vs " +
                      corpus.hash + "); pass --force to evaluate anyway");
    }
    if (info.config_hash != config_hash(cfg.train)) {
      throw ConfigError("checkpoint config hash " + info.config_hash + " differs from the effective train config " +
                        config_hash(cfg.train) + "; pass --force to use it anyway");
    }
  }
  if (model->num_items() != corpus.num_items()) throw DataError("checkpoint and corpus disagree on the catalog size");
  return model;
}

std::optional<eval::CategoryMap> maybe_categories(const ExperimentConfig& cfg, const corpus::Corpus& corpus) {
  if (cfg.eval.diversity_map.empty()) return std::nullopt;
  std::filesystem::path p = cfg.eval.diversity_map;
  const char* data = std::getenv("SIGMA_DATA_DIR");
  if (p.is_relative() && data && *data) p = std::filesystem::path(data) / p;
  return eval::load_category_map(p, corpus);
}

int do_prepare(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.dataset.path.empty()) throw ConfigError("dataset.path (or --input) is required for prepare");
  auto log = corpus::load_interactions(cfg.data_path(), cfg.dataset.effective_threshold());
  auto filtered = corpus::filter_kcore(log, cfg.dataset.min_count);
  if (filtered.records.empty()) throw EmptyCorpusError("no interactions survive the k-core filter");
  auto c = corpus::build_corpus(filtered, cfg.dataset.name, cfg.dataset.type);
  const auto path = cfg.corpus_path();
  corpus::save_corpus(c, path);
  out << corpus::format_stats(c.name, c.stats);
  out << "corpus written to " << path.string() << " (hash " << c.hash << ")\n";
  return 0;
}

int do_train(const ExperimentConfig& cfg, std::ostream& out) {
  auto c = require_corpus(cfg);
  train::TrainOptions opts;
  opts.out_dir = cfg.output_dir;
  opts.seed = cfg.seed;
  opts.progress = &out;
  auto result = train::train(cfg.train, c, opts);
  out << "best epoch " << result.state.best_epoch << " val_recall@20 " << result.state.best_recall << '\n';
  out << "checkpoint written to " << result.checkpoint.string() << '\n';
  return 0;
}

int do_evaluate(const ExperimentConfig& cfg, bool force, std::ostream& out) {
  auto c = require_corpus(cfg);
  train::CheckpointInfo info;
  auto model = require_model(cfg, c, force, info);
  auto cats = maybe_categories(cfg, c);
  eval::RowLabels labels{c.name, model->variant().label(),
                         model->variant().variant == Variant::kUniPrior ? model->variant().uni_lambda
                                                                        : model->config().lambda,
                         model->k(), info.seed};
  auto rows = eval::evaluate(*model, c, cfg.eval.k_list, cats ? &*cats : nullptr, labels);
  out << eval::format_table(rows);
  const auto path = std::filesystem::path(cfg.output_dir) / "evaluation.jsonl";
  eval::write_jsonl(rows, path);
  out << "metrics written to " << path.string() << '\n';
  return 0;
}

int do_recommend(const ExperimentConfig& cfg, const Flags& f, std::ostream& out) {
  if (f.user.empty()) throw ConfigError("--user is required");
  if (f.top_k < 1) throw ConfigError("--k must be positive");
  auto c = require_corpus(cfg);
  train::CheckpointInfo info;
  auto model = require_model(cfg, c, f.force, info);
  const int u = c.find_user(f.user);
  if (u < 0) throw DataError("unknown user '" + f.user + "'");
  auto it = std::find_if(c.splits.begin(), c.splits.end(), [u](const auto& s) { return s.train.user == u; });
  if (it == c.splits.end()) throw DataError("user '" + f.user + "' has no sequence");
  std::vector<int> history = it->test_history();
  history.push_back(it->test_target);
  auto lists = model->recommend({history}, f.top_k);
  out << "rank\titem\tscore\n";
  for (int i = 0; i < lists[0].size(); ++i) {
    out << i + 1 << '\t' << c.item_ids[lists[0].items[i]] << '\t' << lists[0].scores[i] << '\n';
  }
  return 0;
}

int do_ablate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  auto c = require_corpus(cfg);
  auto cats = maybe_categories(cfg, c);
  auto report = eval::ablation_suite(cfg, c, cats ? &*cats : nullptr, &err);
  out << eval::format_table(report.rows);
  if (cats) {
    const int K = *std::max_element(cfg.eval.k_list.begin(), cfg.eval.k_list.end());
    out << "\nlambda sweep (K=" << K << ")\n" << eval::format_lambda_sweep(report.rows, K, cfg.train.resolved_k(c.type));
  }
  const auto path = std::filesystem::path(cfg.output_dir) / "ablation.jsonl";
  eval::write_jsonl(report.rows, path);
  out << "rows written to " << path.string() << '\n';
  for (const auto& failure : report.failures) {
    out << "FAILED cell " << failure.cell.variant << " lambda=" << failure.cell.lambda << " k=" << failure.cell.k
        << " seed=" << failure.cell.seed << ": " << failure.message << '\n';
  }
  return report.rows.empty() && !report.failures.empty() ? static_cast<int>(ExitCode::kRuntime) : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential recommendation with a Gaussian-mixture interest prior", "sigma"};
  app.require_subcommand(1, 1);
  Flags f;
  auto* prepare = app.add_subcommand("prepare", "build a corpus artifact from an interaction log");
  auto* train_cmd = app.add_subcommand("train", "train a model and write the best checkpoint");
  auto* evaluate = app.add_subcommand("evaluate", "rank the test targets of every user");
  auto* recommend = app.add_subcommand("recommend", "top-K items for one user");
  auto* ablate = app.add_subcommand("ablate", "train and evaluate the ablation grid");
  for (auto* cmd : {prepare, train_cmd, evaluate, recommend, ablate}) add_common(cmd, f);
  prepare->add_option("--input", f.input, "interaction log (user, item, rating, timestamp)");
  prepare->add_option("--dataset", f.dataset, "dataset type")->check(CLI::IsMember({"amazon", "movielens"}));
  evaluate->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  recommend->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  recommend->add_option("--user", f.user, "raw user id");
  recommend->add_option("--k", f.top_k, "number of items");

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
    const auto& subs = app.get_subcommands({});
    if (std::none_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args.front(); })) {
      err << "error: unknown subcommand '" << args.front()
          << "'; expected one of: prepare, train, evaluate, recommend, ablate\n";
      return static_cast<int>(ExitCode::kConfig);
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << "expected one of: prepare, train, evaluate, recommend, ablate\n";
    return static_cast<int>(ExitCode::kConfig);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = resolve_config(f, command);
    out << "effective config:\n" << to_json(cfg).dump(2) << '\n';
    if (command == "prepare") return do_prepare(cfg, out);
    if (command == "train") return do_train(cfg, out);
    if (command == "evaluate") return do_evaluate(cfg, f.force, out);
    if (command == "recommend") return do_recommend(cfg, f, out);
    return do_ablate(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfig);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kRuntime);
  }
}

}  // namespace sigma::cli

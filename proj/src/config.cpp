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

#include "sigma/config.hpp"

#include <cstdlib>
#include <fstream>
#include <type_traits>

#include "sigma/errors.hpp"
#include "sigma/util.hpp"

namespace sigma {

namespace {

using nlohmann::json;

template <typename F>
void visit_fields(TrainConfig& c, F&& f) {
  f("variant", c.variant);
  f("uni_lambda", c.uni_lambda);
  f("k", c.k);
  f("lambda", c.lambda);
  f("beta1", c.beta1);
  f("beta2", c.beta2);
  f("lr", c.lr);
  f("dropout", c.dropout);
  f("dim", c.dim);
  f("max_len", c.max_len);
  f("heads", c.heads);
  f("blocks", c.blocks);
  f("patience", c.patience);
  f("max_epochs", c.max_epochs);
  f("batch_size", c.batch_size);
  f("eval_batch_size", c.eval_batch_size);
  f("tau_dec", c.tau_dec);
  f("tau_cat", c.tau_cat);
  f("eps_score", c.eps_score);
  f("gumbel_temperature", c.gumbel_temperature);
  f("straight_through", c.straight_through);
  f("detach_prior", c.detach_prior);
  f("orth_abs", c.orth_abs);
  f("kl_warmup_epochs", c.kl_warmup_epochs);
  f("retrieve_per_interest", c.retrieve_per_interest);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

// Overlays `user` onto `base`, rejecting keys that `base` does not have.
void merge_strict(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (base[key].is_object()) {
      merge_strict(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
void read(const json& j, const std::string& section, const std::string& key, T& out) {
  const std::string name = section.empty() ? key : section + "." + key;
  const json& v = j.at(key);
  bool ok = true;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_integral_v<T>) {
    ok = v.is_number_integer() && (std::is_signed_v<T> || v.is_number_unsigned());
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  }
  if (!ok) throw ConfigError("config key '" + name + "' has the wrong type");
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + name + "' has the wrong type");
  }
}

std::filesystem::path under_env(const std::string& path, const char* var) {
  std::filesystem::path p(path);
  const char* dir = std::getenv(var);
  if (p.is_relative() && dir && *dir) return std::filesystem::path(dir) / p;
  return p;
}

}  // namespace

std::optional<double> DatasetConfig::effective_threshold() const {
  if (positive_threshold) return positive_threshold;
  if (type == "movielens") return 4.0;
  return std::nullopt;
}

void TrainConfig::validate() const {
  require(variant == "full" || variant == "uni_prior" || variant == "no_orth" || variant == "mie_only",
          "train.variant must be one of full, uni_prior, no_orth, mie_only");
  require(k >= 0, "train.k must be >= 1 (0 selects the dataset default)");
  require(lambda >= 0 && beta1 >= 0 && beta2 >= 0 && uni_lambda >= 0, "loss weights must be non-negative");
  require(lr > 0, "train.lr must be positive");
  require(dropout >= 0 && dropout < 1, "train.dropout must be in [0, 1)");
  require(dim >= 1 && heads >= 1 && dim % heads == 0, "train.dim must be a positive multiple of train.heads");
  require(max_len >= 1 && blocks >= 1, "train.max_len and train.blocks must be positive");
  require(patience >= 1 && max_epochs >= 1, "train.patience and train.max_epochs must be positive");
  require(batch_size >= 1 && eval_batch_size >= 1, "batch sizes must be positive");
  require(tau_dec > 0 && tau_cat > 0 && eps_score > 0 && gumbel_temperature > 0, "temperatures must be positive");
  require(kl_warmup_epochs >= 0, "train.kl_warmup_epochs must be non-negative");
  require(retrieve_per_interest >= 1, "train.retrieve_per_interest must be positive");
}

int TrainConfig::resolved_k(const std::string& dataset_type) const {
  if (k > 0) return k;
  return dataset_type == "movielens" ? 8 : 4;
}

void ExperimentConfig::validate() const {
  require(dataset.type == "amazon" || dataset.type == "movielens", "dataset.type must be amazon or movielens");
  require(dataset.min_count >= 1, "dataset.min_count must be positive");
  train.validate();
  require(!eval.k_list.empty(), "eval.k_list must not be empty");
  for (int k : eval.k_list) require(k >= 1, "eval.k_list entries must be positive");
  require(!seeds.empty(), "seeds must not be empty");
  for (int k : ablation.k_grid) require(k >= 1, "ablation.k_grid entries must be positive");
  for (double l : ablation.lambda_grid) require(l >= 0, "ablation.lambda_grid entries must be non-negative");
}

std::filesystem::path ExperimentConfig::data_path() const { return under_env(dataset.path, "SIGMA_DATA_DIR"); }

std::filesystem::path ExperimentConfig::corpus_path() const {
  if (!dataset.corpus.empty()) return under_env(dataset.corpus, "SIGMA_CACHE_DIR");
  const char* cache = std::getenv("SIGMA_CACHE_DIR");
  std::filesystem::path dir = cache && *cache ? std::filesystem::path(cache) : std::filesystem::path(output_dir);
  return dir / (dataset.name + ".corpus.json");
}

std::filesystem::path ExperimentConfig::checkpoint_path() const {
  if (!eval.checkpoint.empty()) return eval.checkpoint;
  return std::filesystem::path(output_dir) / "model.ckpt";
}

nlohmann::json to_json(const TrainConfig& c) {
  json j = json::object();
  TrainConfig copy = c;
  visit_fields(copy, [&](const char* name, auto& v) { j[name] = v; });
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  json base = to_json(TrainConfig{});
  merge_strict(base, j, "train");
  TrainConfig c;
  visit_fields(c, [&](const char* name, auto& v) { read(base, "train", name, v); });
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = {{"name", c.dataset.name},
                  {"path", c.dataset.path},
                  {"type", c.dataset.type},
                  {"positive_threshold", c.dataset.positive_threshold ? json(*c.dataset.positive_threshold) : json()},
                  {"min_count", c.dataset.min_count},
                  {"corpus", c.dataset.corpus}};
  j["train"] = to_json(c.train);
  j["eval"] = {{"k_list", c.eval.k_list}, {"diversity_map", c.eval.diversity_map}, {"checkpoint", c.eval.checkpoint}};
  j["ablation"] = {
      {"variants", c.ablation.variants}, {"lambda_grid", c.ablation.lambda_grid}, {"k_grid", c.ablation.k_grid}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  json base = to_json(ExperimentConfig{});
  merge_strict(base, j, "");
  ExperimentConfig c;
  const json& d = base["dataset"];
  read(d, "dataset", "name", c.dataset.name);
  read(d, "dataset", "path", c.dataset.path);
  read(d, "dataset", "type", c.dataset.type);
  if (!d["positive_threshold"].is_null()) {
    double t = 0;
    read(d, "dataset", "positive_threshold", t);
    c.dataset.positive_threshold = t;
  }
  read(d, "dataset", "min_count", c.dataset.min_count);
  read(d, "dataset", "corpus", c.dataset.corpus);
  visit_fields(c.train, [&](const char* name, auto& v) { read(base["train"], "train", name, v); });
  read(base["eval"], "eval", "k_list", c.eval.k_list);
  read(base["eval"], "eval", "diversity_map", c.eval.diversity_map);
  read(base["eval"], "eval", "checkpoint", c.eval.checkpoint);
  read(base["ablation"], "ablation", "variants", c.ablation.variants);
  read(base["ablation"], "ablation", "lambda_grid", c.ablation.lambda_grid);
  read(base["ablation"], "ablation", "k_grid", c.ablation.k_grid);
  read(base, "", "output_dir", c.output_dir);
  read(base, "", "seed", c.seed);
  read(base, "", "seeds", c.seeds);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void apply_override(nlohmann::json& config, const std::string& key, const std::string& value) {
  json* node = &config;
  size_t start = 0;
  std::string path;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    path += (path.empty() ? "" : ".") + part;
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown override key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("override key '" + key + "' names a section");
  if (node->is_string()) {
    *node = value;
    return;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string config_hash(const TrainConfig& c) { return fnv1a_hex(to_json(c).dump()); }

}  // namespace sigma

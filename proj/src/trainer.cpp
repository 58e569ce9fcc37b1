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

#include "sigma/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>
#include <numeric>

#include "sigma/errors.hpp"
#include "sigma/metrics.hpp"
#include "sigma/packed.hpp"

namespace sigma::train {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'I', 'G', 'M', 'A', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void check_grads_finite(const nn::ParameterStore& store) {
  for (const auto& [name, p] : store.items()) {
    const ad::Matrix& g = p.node()->grad;
    if (g.size() > 0 && !g.allFinite()) throw NumericError("non-finite gradient in parameter '" + name + "'");
  }
}

}  // namespace

json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"losses", losses}, {"val_recall@20", val_recall}, {"seconds", seconds},
          {"improved", improved}};
}

bool TrainState::observe(double recall, int epoch_index) {
  epoch = epoch_index + 1;
  if (recall > best_recall) {
    best_recall = recall;
    best_epoch = epoch_index;
    since_best = 0;
    return true;
  }
  ++since_best;
  return false;
}

double validation_recall(const SigmaModel& model, const corpus::Corpus& corpus, int k) {
  std::vector<std::vector<int>> histories;
  std::vector<int> targets;
  for (const auto& s : corpus.splits) {
    histories.push_back(s.train.items);
    targets.push_back(s.val_target);
  }
  if (histories.empty()) return 0.0;
  auto lists = model.recommend(histories, k);
  double hits = 0.0;
  for (size_t i = 0; i < lists.size(); ++i) hits += eval::recall_at_k(lists[i], targets[i], k, corpus.num_items());
  return hits / static_cast<double>(lists.size());
}

std::map<std::string, double> train_epoch(SigmaModel& model, nn::Adam& adam, const corpus::Corpus& corpus,
                                          ad::Rng& rng, double kl_scale) {
  std::vector<const corpus::Split*> usable;
  for (const auto& s : corpus.splits) {
    if (s.train.length() >= 2) usable.push_back(&s);
  }
  std::vector<size_t> order(usable.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const auto& cfg = model.config();
  std::map<std::string, double> sums;
  double positions = 0.0;
  for (size_t b = 0; b < order.size(); b += static_cast<size_t>(cfg.batch_size)) {
    const size_t e = std::min(order.size(), b + static_cast<size_t>(cfg.batch_size));
    std::vector<const corpus::Split*> rows;
    for (size_t i = b; i < e; ++i) rows.push_back(usable[order[i]]);
    PackedBatch batch = pack(corpus::make_training_batch(rows, cfg.max_len));
    if (batch.rows() == 0) continue;
    LossParts loss = model.joint_loss(batch, rng, kl_scale);
    model.parameters().zero_grad();
    ad::backward(loss.total);
    check_grads_finite(model.parameters());
    adam.step();
    model.after_step();
    for (const auto& [name, v] : loss.parts) sums[name] += v * batch.rows();
    positions += batch.rows();
  }
  if (positions > 0) {
    for (auto& [name, v] : sums) v /= positions;
  }
  return sums;
}

TrainResult train(const TrainConfig& config, const corpus::Corpus& corpus, const TrainOptions& options) {
  config.validate();
  if (corpus.num_items() < 1 || corpus.splits.empty()) throw DataError("corpus has no users or items");
  if (std::none_of(corpus.splits.begin(), corpus.splits.end(), [](const auto& s) { return s.train.length() >= 2; })) {
    throw DataError("corpus has no training sequence with at least two items");
  }
  if (corpus.type != "amazon" && corpus.type != "movielens") {
    throw ConfigError("corpus type '" + corpus.type + "' is not supported");
  }
  const int k = config.resolved_k(corpus.type);

  TrainResult result;
  result.model = std::make_unique<SigmaModel>(config, k, corpus.num_items(), options.seed);
  SigmaModel& model = *result.model;
  nn::Adam adam(model.parameters(), nn::Adam::Options{config.lr});
  ad::Rng rng(options.seed ^ 0x9e3779b97f4a7c15ull);

  std::ofstream log;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    log.open(options.out_dir / "metrics.jsonl");
    if (!log) throw DataError("cannot write metrics log in " + options.out_dir.string());
    result.checkpoint = options.out_dir / "model.ckpt";
  }

  std::vector<ad::Matrix> best = model.parameters().snapshot();
  json curve = json::array();
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double kl_scale =
        config.kl_warmup_epochs > 0 ? std::min(1.0, (epoch + 1.0) / config.kl_warmup_epochs) : 1.0;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.losses = train_epoch(model, adam, corpus, rng, kl_scale);
    rec.val_recall = validation_recall(model, corpus, options.validation_k);
    rec.improved = result.state.observe(rec.val_recall, epoch);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    curve.push_back({{"epoch", epoch}, {"val_recall@20", rec.val_recall}});
    if (rec.improved) {
      best = model.parameters().snapshot();
      if (!result.checkpoint.empty()) save_checkpoint(model, corpus, options.seed, curve, result.checkpoint);
    }
    if (log.is_open()) log << rec.to_json().dump() << '\n' << std::flush;
    if (options.progress) {
      *options.progress << "epoch " << epoch << " loss " << rec.losses["total"] << " val_recall@20 "
                        << rec.val_recall << (rec.improved ? " *" : "") << '\n';
    }
    if (options.on_epoch) options.on_epoch(rec);
    result.history.push_back(std::move(rec));
    if (result.state.exhausted(config.patience)) {
      result.stopped_early = true;
      break;
    }
  }
  model.parameters().restore(best);
  if (!result.checkpoint.empty()) save_checkpoint(model, corpus, options.seed, curve, result.checkpoint);
  return result;
}

void save_checkpoint(const SigmaModel& model, const corpus::Corpus& corpus, std::uint64_t seed,
                     const nlohmann::json& curve, const std::filesystem::path& path) {
  json tensors = json::array();
  for (const auto& [name, p] : model.parameters().items()) {
    tensors.push_back({{"name", name}, {"rows", p.rows()}, {"cols", p.cols()}});
  }
  json header = {{"config", to_json(model.config())},
                 {"config_hash", config_hash(model.config())},
                 {"corpus_hash", corpus.hash},
                 {"dataset", corpus.name},
                 {"k", model.k()},
                 {"num_items", model.num_items()},
                 {"seed", seed},
                 {"item_ids", corpus.item_ids},
                 {"user_ids", corpus.user_ids},
                 {"validation_curve", curve},
                 {"tensors", tensors}};
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, p] : model.parameters().items()) {
      out.write(reinterpret_cast<const char*>(p.value().data()),
                static_cast<std::streamsize>(p.value().size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<SigmaModel> load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError(path.string() + " is not a checkpoint");
  if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  if (len > (1ull << 32)) throw DataError("checkpoint header is corrupt");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("checkpoint header is truncated");

  CheckpointInfo meta;
  json header;
  try {
    header = json::parse(text);
    meta.config = train_config_from_json(header.at("config"));
    meta.config_hash = header.at("config_hash").get<std::string>();
    meta.corpus_hash = header.at("corpus_hash").get<std::string>();
    meta.dataset = header.at("dataset").get<std::string>();
    meta.k = header.at("k").get<int>();
    meta.num_items = header.at("num_items").get<int>();
    meta.seed = header.at("seed").get<std::uint64_t>();
    meta.item_ids = header.at("item_ids").get<std::vector<std::string>>();
    meta.curve = header.at("validation_curve");
  } catch (const json::exception& e) {
    throw DataError("checkpoint header is malformed: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw DataError("checkpoint config is invalid: " + std::string(e.what()));
  }
  if (config_hash(meta.config) != meta.config_hash) throw DataError("checkpoint config hash mismatch");
  if (static_cast<int>(meta.item_ids.size()) != meta.num_items + 1) throw DataError("checkpoint id map size mismatch");

  auto model = std::make_unique<SigmaModel>(meta.config, meta.k, meta.num_items, meta.seed);
  const json& tensors = header.at("tensors");
  if (tensors.size() != model->parameters().size()) throw DataError("checkpoint tensor count mismatch");
  size_t i = 0;
  for (const auto& [name, p] : model->parameters().items()) {
    const json& t = tensors[i++];
    if (t.at("name").get<std::string>() != name || t.at("rows").get<Eigen::Index>() != p.rows() ||
        t.at("cols").get<Eigen::Index>() != p.cols()) {
      throw DataError("checkpoint tensor '" + t.at("name").get<std::string>() + "' does not match parameter '" +
                      name + "'");
    }
    ad::Var handle = p;
    ad::Matrix& value = handle.mutable_value();
    in.read(reinterpret_cast<char*>(value.data()), static_cast<std::streamsize>(value.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint tensor data is truncated");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint has trailing data");
  if (info) *info = std::move(meta);
  return model;
}

}  // namespace sigma::train

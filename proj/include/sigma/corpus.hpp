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

// Interaction-log ingestion, k-core filtering, leave-one-out splitting and
// fixed-length batching.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sigma::corpus {

// Index 0 of the item catalog is reserved for padding.
inline constexpr int kPadItem = 0;

struct Interaction {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::int64_t timestamp = 0;
  long order = 0;  // position in the source file, breaks timestamp ties
  // Filled by filter_kcore: user in [0, #users), item in [1, #items].
  int user_index = -1;
  int item_index = -1;
};

struct InteractionLog {
  std::vector<Interaction> records;
  // Populated by filter_kcore; user_ids[u] / item_ids[i] give the raw id.
  // item_ids[0] is the empty padding entry.
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  bool indexed() const { return !item_ids.empty(); }
  int num_users() const { return static_cast<int>(user_ids.size()); }
  int num_items() const { return static_cast<int>(item_ids.size()) - 1; }
};

struct UserSequence {
  int user = -1;
  std::vector<int> items;  // ascending timestamp order

  int length() const { return static_cast<int>(items.size()); }
};

struct Split {
  UserSequence train;
  int val_target = kPadItem;
  int test_target = kPadItem;

  // Items conditioned on when scoring the test target (train + val).
  std::vector<int> test_history() const;
};

struct PaddedRow {
  std::vector<int> ids;
  std::vector<bool> mask;
};

// Fixed-length front-padded rows. targets(r, c) is the next item for a real
// position, kPadItem elsewhere (or everywhere for history-only batches).
struct SequenceBatch {
  int rows = 0;
  int max_len = 0;
  std::vector<int> ids;
  std::vector<int> targets;
  std::vector<unsigned char> mask;
  std::vector<int> users;

  int id(int r, int c) const { return ids[static_cast<size_t>(r) * max_len + c]; }
  int target(int r, int c) const { return targets[static_cast<size_t>(r) * max_len + c]; }
  bool valid(int r, int c) const { return mask[static_cast<size_t>(r) * max_len + c] != 0; }
};

struct DatasetStats {
  long users = 0;
  long items = 0;
  long interactions = 0;
  double avg_seq_len = 0.0;
  long excluded_short = 0;  // sequences with fewer than 3 items
};

// Prepared artifact: id maps, split sequences and statistics.
struct Corpus {
  std::string name;
  std::string type;  // "amazon" or "movielens"
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;  // [0] is padding
  std::vector<Split> splits;
  DatasetStats stats;
  std::string hash;

  int num_items() const { return static_cast<int>(item_ids.size()) - 1; }
  int find_user(const std::string& raw) const;  // -1 when absent
  int find_item(const std::string& raw) const;  // kPadItem when absent
};

// Reads user, item, rating, timestamp records. Accepts tab, comma or "::"
// separators, an optional header line, and gzip-compressed input.
InteractionLog load_interactions(const std::filesystem::path& path, std::optional<double> positive_threshold);
InteractionLog parse_interactions(std::istream& in, const std::string& source, std::optional<double> positive_threshold);

// Iteratively drops users and items with fewer than min_count records until a
// fixed point, then assigns contiguous indices in order of first appearance.
InteractionLog filter_kcore(const InteractionLog& log, int min_count = 5);

// One time-ordered sequence per user of an indexed log; ties keep file order.
std::vector<UserSequence> build_sequences(const InteractionLog& log);

// Returns nullopt when the sequence has fewer than three items.
std::optional<Split> split_leave_one_out(const UserSequence& seq);

PaddedRow pad_truncate(const std::vector<int>& items, int max_len = 100);
std::vector<int> unpad(const PaddedRow& row);

// Inputs are train[:-1] and targets train[1:], both padded to max_len.
SequenceBatch make_training_batch(const std::vector<const Split*>& splits, int max_len);
// History rows without targets, used for scoring.
SequenceBatch make_history_batch(const std::vector<std::vector<int>>& histories, int max_len);

DatasetStats compute_stats(const InteractionLog& log, long excluded_short);
Corpus build_corpus(const InteractionLog& indexed, const std::string& name, const std::string& type);
// Human readable table with the #Users / #Items / #Interactions /
// Avg. seq. len. columns.
std::string format_stats(const std::string& name, const DatasetStats& stats);

nlohmann::json to_json(const Corpus& c);
Corpus corpus_from_json(const nlohmann::json& j);
void save_corpus(const Corpus& c, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace sigma::corpus

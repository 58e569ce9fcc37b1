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

#include "sigma/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "sigma/errors.hpp"
#include "sigma/util.hpp"

namespace sigma::corpus {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  if (line.find("::") != std::string::npos) {
    size_t start = 0, pos;
    while ((pos = line.find("::", start)) != std::string::npos) {
      out.push_back(line.substr(start, pos - start));
      start = pos + 2;
    }
    out.push_back(line.substr(start));
    return out;
  }
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \r\n\"");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \r\n\"");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<int> Split::test_history() const {
  std::vector<int> h = train.items;
  h.push_back(val_target);
  return h;
}

int Corpus::find_user(const std::string& raw) const {
  auto it = std::find(user_ids.begin(), user_ids.end(), raw);
  return it == user_ids.end() ? -1 : static_cast<int>(it - user_ids.begin());
}

int Corpus::find_item(const std::string& raw) const {
  auto it = std::find(item_ids.begin() + 1, item_ids.end(), raw);
  return it == item_ids.end() ? kPadItem : static_cast<int>(it - item_ids.begin());
}

InteractionLog parse_interactions(std::istream& in, const std::string& source,
                                  std::optional<double> positive_threshold) {
  InteractionLog log;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < 4) throw ParseError(source, lineno, "expected user, item, rating, timestamp");
    double rating = 0.0, ts = 0.0;
    const bool numeric = parse_double(trim(fields[2]), rating) && parse_double(trim(fields[3]), ts);
    if (!numeric) {
      if (lineno == 1) continue;  // header
      throw ParseError(source, lineno, "rating and timestamp must be numeric");
    }
    if (positive_threshold && rating < *positive_threshold) continue;
    Interaction r;
    r.user = trim(fields[0]);
    r.item = trim(fields[1]);
    if (r.user.empty() || r.item.empty()) throw ParseError(source, lineno, "empty user or item id");
    r.rating = rating;
    r.timestamp = static_cast<std::int64_t>(ts);
    r.order = static_cast<long>(log.records.size());
    log.records.push_back(std::move(r));
  }
  if (log.records.empty()) throw EmptyCorpusError(source + ": no interactions left after reading");
  return log;
}

InteractionLog load_interactions(const std::filesystem::path& path, std::optional<double> positive_threshold) {
  // gzread passes uncompressed files through unchanged.
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw DataError("cannot open " + path.string());
  std::string content;
  std::vector<char> buf(1 << 16);
  int n;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0) content.append(buf.data(), n);
  int err = 0;
  const char* msg = gzerror(f, &err);
  std::string error = (n < 0 && msg) ? msg : "";
  gzclose(f);
  if (n < 0) throw DataError("read error in " + path.string() + ": " + error);
  std::istringstream in(content);
  return parse_interactions(in, path.string(), positive_threshold);
}

InteractionLog filter_kcore(const InteractionLog& log, int min_count) {
  if (min_count < 1) throw DomainError("filter_kcore: min_count must be >= 1");
  std::vector<const Interaction*> alive;
  alive.reserve(log.records.size());
  for (const auto& r : log.records) alive.push_back(&r);

  bool changed = true;
  while (changed) {
    std::unordered_map<std::string, int> ucount, icount;
    for (auto* r : alive) {
      ++ucount[r->user];
      ++icount[r->item];
    }
    std::vector<const Interaction*> next;
    next.reserve(alive.size());
    for (auto* r : alive) {
      if (ucount[r->user] >= min_count && icount[r->item] >= min_count) next.push_back(r);
    }
    changed = next.size() != alive.size();
    alive.swap(next);
  }
  if (alive.empty()) throw EmptyCorpusError("k-core filtering removed every interaction");

  InteractionLog out;
  out.item_ids.push_back("");
  std::unordered_map<std::string, int> uidx, iidx;
  for (auto* r : alive) {
    Interaction c = *r;
    auto [uit, unew] = uidx.try_emplace(c.user, static_cast<int>(out.user_ids.size()));
    if (unew) out.user_ids.push_back(c.user);
    auto [iit, inew] = iidx.try_emplace(c.item, static_cast<int>(out.item_ids.size()));
    if (inew) out.item_ids.push_back(c.item);
    c.user_index = uit->second;
    c.item_index = iit->second;
    out.records.push_back(std::move(c));
  }
  return out;
}

std::vector<UserSequence> build_sequences(const InteractionLog& log) {
  if (!log.indexed()) throw DomainError("build_sequences: log has not been indexed by filter_kcore");
  std::vector<std::vector<const Interaction*>> per_user(log.user_ids.size());
  for (const auto& r : log.records) per_user[r.user_index].push_back(&r);
  std::vector<UserSequence> seqs(per_user.size());
  for (size_t u = 0; u < per_user.size(); ++u) {
    auto& recs = per_user[u];
    std::stable_sort(recs.begin(), recs.end(), [](const Interaction* a, const Interaction* b) {
      return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->order < b->order;
    });
    seqs[u].user = static_cast<int>(u);
    for (auto* r : recs) seqs[u].items.push_back(r->item_index);
  }
  return seqs;
}

std::optional<Split> split_leave_one_out(const UserSequence& seq) {
  const int t = seq.length();
  if (t < 3) return std::nullopt;
  Split s;
  s.train.user = seq.user;
  s.train.items.assign(seq.items.begin(), seq.items.end() - 2);
  s.val_target = seq.items[t - 2];
  s.test_target = seq.items[t - 1];
  return s;
}

PaddedRow pad_truncate(const std::vector<int>& items, int max_len) {
  if (max_len < 1) throw DomainError("pad_truncate: max_len must be >= 1");
  PaddedRow row;
  row.ids.assign(max_len, kPadItem);
  row.mask.assign(max_len, false);
  const int n = std::min<int>(static_cast<int>(items.size()), max_len);
  const int skip = static_cast<int>(items.size()) - n;
  for (int i = 0; i < n; ++i) {
    row.ids[max_len - n + i] = items[skip + i];
    row.mask[max_len - n + i] = true;
  }
  return row;
}

std::vector<int> unpad(const PaddedRow& row) {
  std::vector<int> out;
  for (size_t i = 0; i < row.ids.size(); ++i) {
    if (row.mask[i]) out.push_back(row.ids[i]);
  }
  return out;
}

namespace {

void append_row(SequenceBatch& b, const PaddedRow& in, const PaddedRow* tgt, int user) {
  b.ids.insert(b.ids.end(), in.ids.begin(), in.ids.end());
  for (bool m : in.mask) b.mask.push_back(m ? 1 : 0);
  if (tgt) {
    b.targets.insert(b.targets.end(), tgt->ids.begin(), tgt->ids.end());
  } else {
    b.targets.insert(b.targets.end(), in.ids.size(), kPadItem);
  }
  b.users.push_back(user);
  ++b.rows;
}

}  // namespace

SequenceBatch make_training_batch(const std::vector<const Split*>& splits, int max_len) {
  SequenceBatch b;
  b.max_len = max_len;
  for (const Split* s : splits) {
    const auto& items = s->train.items;
    std::vector<int> in, out;
    if (items.size() >= 2) {
      in.assign(items.begin(), items.end() - 1);
      out.assign(items.begin() + 1, items.end());
    }
    PaddedRow pin = pad_truncate(in, max_len), pout = pad_truncate(out, max_len);
    append_row(b, pin, &pout, s->train.user);
  }
  return b;
}

SequenceBatch make_history_batch(const std::vector<std::vector<int>>& histories, int max_len) {
  SequenceBatch b;
  b.max_len = max_len;
  for (const auto& h : histories) append_row(b, pad_truncate(h, max_len), nullptr, -1);
  return b;
}

DatasetStats compute_stats(const InteractionLog& log, long excluded_short) {
  DatasetStats s;
  s.users = log.num_users();
  s.items = log.num_items();
  s.interactions = static_cast<long>(log.records.size());
  s.avg_seq_len = s.users > 0 ? static_cast<double>(s.interactions) / static_cast<double>(s.users) : 0.0;
  s.excluded_short = excluded_short;
  return s;
}

Corpus build_corpus(const InteractionLog& indexed, const std::string& name, const std::string& type) {
  Corpus c;
  c.name = name;
  c.type = type;
  c.user_ids = indexed.user_ids;
  c.item_ids = indexed.item_ids;
  long excluded = 0;
  for (const auto& seq : build_sequences(indexed)) {
    if (auto s = split_leave_one_out(seq)) {
      c.splits.push_back(std::move(*s));
    } else {
      ++excluded;
    }
  }
  if (c.splits.empty()) throw EmptyCorpusError("no user has at least three interactions");
  c.stats = compute_stats(indexed, excluded);
  std::string digest;
  for (const auto& s : c.splits) {
    digest += std::to_string(s.train.user) + ':';
    for (int i : s.train.items) digest += std::to_string(i) + ',';
    digest += std::to_string(s.val_target) + ',' + std::to_string(s.test_target) + ';';
  }
  c.hash = fnv1a_hex(type + '|' + std::to_string(c.num_items()) + '|' + digest);
  return c;
}

std::string format_stats(const std::string& name, const DatasetStats& s) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Dataset" << std::right << std::setw(10) << "#Users" << std::setw(10)
     << "#Items" << std::setw(16) << "#Interactions" << std::setw(16) << "Avg. seq. len." << '\n';
  os << std::left << std::setw(14) << name << std::right << std::setw(10) << s.users << std::setw(10) << s.items
     << std::setw(16) << s.interactions << std::setw(16) << std::fixed << std::setprecision(1) << s.avg_seq_len
     << '\n';
  if (s.excluded_short > 0) os << "warning: " << s.excluded_short << " sequences shorter than 3 were excluded\n";
  return os.str();
}

nlohmann::json to_json(const Corpus& c) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : c.splits) {
    splits.push_back({{"user", s.train.user}, {"train", s.train.items}, {"val", s.val_target}, {"test", s.test_target}});
  }
  return {{"format", "sigmarec-corpus"},
          {"version", 1},
          {"name", c.name},
          {"type", c.type},
          {"hash", c.hash},
          {"stats",
           {{"users", c.stats.users},
            {"items", c.stats.items},
            {"interactions", c.stats.interactions},
            {"avg_seq_len", c.stats.avg_seq_len},
            {"excluded_short", c.stats.excluded_short}}},
          {"user_ids", c.user_ids},
          {"item_ids", c.item_ids},
          {"splits", splits}};
}

Corpus corpus_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "sigmarec-corpus" || j.at("version") != 1) throw DataError("not a corpus artifact");
    Corpus c;
    c.name = j.at("name");
    c.type = j.at("type");
    c.hash = j.at("hash");
    const auto& st = j.at("stats");
    c.stats.users = st.at("users");
    c.stats.items = st.at("items");
    c.stats.interactions = st.at("interactions");
    c.stats.avg_seq_len = st.at("avg_seq_len");
    c.stats.excluded_short = st.at("excluded_short");
    c.user_ids = j.at("user_ids").get<std::vector<std::string>>();
    c.item_ids = j.at("item_ids").get<std::vector<std::string>>();
    for (const auto& s : j.at("splits")) {
      Split sp;
      sp.train.user = s.at("user");
      sp.train.items = s.at("train").get<std::vector<int>>();
      sp.val_target = s.at("val");
      sp.test_target = s.at("test");
      c.splits.push_back(std::move(sp));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed corpus artifact: ") + e.what());
  }
}

void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(c).dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("corpus artifact not found: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
  return corpus_from_json(j);
}

}  // namespace sigma::corpus

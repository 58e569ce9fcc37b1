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

#include "sigma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "sigma/errors.hpp"

namespace sigma::eval {

void RankedList::validate() const {
  if (items.size() != scores.size()) throw DomainError("ranked list: items and scores differ in length");
  std::unordered_set<int> seen;
  for (size_t i = 0; i < items.size(); ++i) {
    if (!seen.insert(items[i]).second) throw DomainError("ranked list: duplicate item " + std::to_string(items[i]));
    if (i > 0 && scores[i] > scores[i - 1]) throw DomainError("ranked list: scores not sorted");
  }
}

int RankedList::rank_of(int item) const {
  auto it = std::find(items.begin(), items.end(), item);
  return it == items.end() ? 0 : static_cast<int>(it - items.begin()) + 1;
}

RankedList top_k(const Eigen::Ref<const Eigen::VectorXd>& scores, int k, int offset, int user) {
  const int n = static_cast<int>(scores.size());
  k = std::clamp(k, 0, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](int a, int b) { return scores(a) > scores(b) || (scores(a) == scores(b) && a < b); };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  RankedList out;
  out.user = user;
  out.items.reserve(k);
  out.scores.reserve(k);
  for (int i = 0; i < k; ++i) {
    out.items.push_back(order[i] + offset);
    out.scores.push_back(scores(order[i]));
  }
  return out;
}

namespace {

int checked_rank(const RankedList& ranked, int target, int num_items) {
  if (target < 1 || target > num_items) {
    throw EvaluationError("target item " + std::to_string(target) + " is not in the catalog");
  }
  return ranked.rank_of(target);
}

}  // namespace

double recall_at_k(const RankedList& ranked, int target, int k, int num_items) {
  const int rank = checked_rank(ranked, target, num_items);
  return rank >= 1 && rank <= k ? 1.0 : 0.0;
}

double ndcg_at_k(const RankedList& ranked, int target, int k, int num_items) {
  const int rank = checked_rank(ranked, target, num_items);
  return rank >= 1 && rank <= k ? 1.0 / std::log2(rank + 1.0) : 0.0;
}

void CategoryMap::set(int item, std::vector<int> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  labels_[item] = std::move(labels);
}

const std::vector<int>& CategoryMap::labels(int item) const {
  auto it = labels_.find(item);
  if (it == labels_.end()) throw EvaluationError("item " + std::to_string(item) + " has no category labels");
  return it->second;
}

bool CategoryMap::same_category(int a, int b) const {
  const auto& la = labels(a);
  const auto& lb = labels(b);
  size_t i = 0, j = 0;
  while (i < la.size() && j < lb.size()) {
    if (la[i] == lb[j]) return true;
    if (la[i] < lb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

int CategoryMap::intern(const std::string& label) {
  auto [it, inserted] = name_index_.emplace(label, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(label);
  return it->second;
}

CategoryMap load_category_map(const std::filesystem::path& path, const corpus::Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open category file " + path.string());
  CategoryMap map;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string id, labels;
    if (auto p = line.find("::"); p != std::string::npos) {
      id = line.substr(0, p);
      labels = line.substr(line.rfind("::") + 2);
    } else if (auto q = line.find_first_of("\t,"); q != std::string::npos) {
      id = line.substr(0, q);
      labels = line.substr(q + 1);
    } else {
      throw ParseError(path.string(), number, "expected an item id and a label list");
    }
    const int item = corpus.find_item(id);
    if (item == corpus::kPadItem) continue;
    std::vector<int> ids;
    std::stringstream ss(labels);
    std::string label;
    while (std::getline(ss, label, '|')) {
      if (!label.empty()) ids.push_back(map.intern(label));
    }
    if (ids.empty()) throw ParseError(path.string(), number, "item without labels");
    map.set(item, std::move(ids));
  }
  return map;
}

double diversity_at_k(const std::vector<RankedList>& lists, const CategoryMap& categories, int k) {
  if (k < 2) throw DomainError("diversity_at_k: K must be at least 2");
  std::set<int> missing;
  for (const auto& list : lists) {
    for (int i = 0; i < std::min(k, list.size()); ++i) {
      if (!categories.contains(list.items[i])) missing.insert(list.items[i]);
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (int m : missing) names += (names.empty() ? "" : ", ") + std::to_string(m);
    throw EvaluationError("items without category labels: " + names);
  }
  if (lists.empty()) return 0.0;
  double total = 0.0;
  for (const auto& list : lists) {
    const int m = std::min(k, list.size());
    if (m < 2) throw DomainError("diversity_at_k: list shorter than two items");
    long differ = 0;
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) differ += categories.same_category(list.items[a], list.items[b]) ? 0 : 1;
    }
    total += static_cast<double>(differ) / (m * (m - 1) / 2.0);
  }
  return total / static_cast<double>(lists.size());
}

}  // namespace sigma::eval

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

// Ranked recommendation lists and the single-target ranking metrics.

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "sigma/corpus.hpp"

namespace sigma::eval {

struct RankedList {
  int user = -1;
  std::vector<int> items;  // item indices, best first
  std::vector<double> scores;

  int size() const { return static_cast<int>(items.size()); }
  // Throws DomainError on duplicates, unsorted scores or a size mismatch.
  void validate() const;
  // 1-based rank of `item`, 0 when absent.
  int rank_of(int item) const;
};

// The k best entries of `scores`; entry c stands for item c + offset. Ties go
// to the lower item index. k is clipped to the number of candidates.
RankedList top_k(const Eigen::Ref<const Eigen::VectorXd>& scores, int k, int offset = 1, int user = -1);

// Both throw EvaluationError when target is outside [1, num_items].
double recall_at_k(const RankedList& ranked, int target, int k, int num_items);
double ndcg_at_k(const RankedList& ranked, int target, int k, int num_items);

// Item -> genre labels. Two items are in the same category when their label
// sets intersect.
class CategoryMap {
 public:
  void set(int item, std::vector<int> labels);
  bool contains(int item) const { return labels_.count(item) > 0; }
  const std::vector<int>& labels(int item) const;
  bool same_category(int a, int b) const;
  size_t size() const { return labels_.size(); }
  int intern(const std::string& label);
  const std::vector<std::string>& label_names() const { return names_; }

 private:
  std::unordered_map<int, std::vector<int>> labels_;  // sorted label ids
  std::unordered_map<std::string, int> name_index_;
  std::vector<std::string> names_;
};

// Reads `item<sep>labels` lines where labels are '|'-separated and <sep> is a
// tab or comma. MovieLens `id::title::genres` lines are accepted as well.
// Items unknown to the corpus are skipped.
CategoryMap load_category_map(const std::filesystem::path& path, const corpus::Corpus& corpus);

// Mean over lists of the fraction of differing-category pairs among the top k.
// Throws DomainError for k < 2 and EvaluationError naming items without labels.
double diversity_at_k(const std::vector<RankedList>& lists, const CategoryMap& categories, int k);

}  // namespace sigma::eval

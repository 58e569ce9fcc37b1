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

#include <vector>

#include "sigma/corpus.hpp"
#include "sigma/fused_ops.hpp"

namespace sigma {

// The real positions of a SequenceBatch laid out row after row. Padding never
// reaches the networks; rows without any real position are dropped.
struct PackedBatch {
  ad::Segments segs;
  std::vector<int> ids;        // item index per packed row
  std::vector<int> positions;  // 0-based index of the item within its sequence
  std::vector<int> targets;    // next item, kPadItem when unknown
  std::vector<int> batch_rows; // source row of each segment

  int rows() const { return segs.total(); }
  bool has_targets() const;
};

PackedBatch pack(const corpus::SequenceBatch& batch);

}  // namespace sigma

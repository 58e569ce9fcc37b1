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

#include "sigma/packed.hpp"

#include <algorithm>

namespace sigma {

bool PackedBatch::has_targets() const {
  return !targets.empty() && std::none_of(targets.begin(), targets.end(),
                                          [](int t) { return t == corpus::kPadItem; });
}

PackedBatch pack(const corpus::SequenceBatch& batch) {
  PackedBatch p;
  for (int r = 0; r < batch.rows; ++r) {
    int n = 0;
    for (int c = 0; c < batch.max_len; ++c) {
      if (!batch.valid(r, c)) continue;
      p.ids.push_back(batch.id(r, c));
      p.positions.push_back(n++);
      p.targets.push_back(batch.target(r, c));
    }
    if (n > 0) {
      p.segs.push(n);
      p.batch_rows.push_back(r);
    }
  }
  return p;
}

}  // namespace sigma

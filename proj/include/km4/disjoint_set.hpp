// Copyright 2026 The km4 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace km4 {

/// Union-find over dense integer ids with union by size.
/// Members of each class are tracked so a class can be enumerated without a
/// scan; merging moves the smaller member list into the larger.
class DisjointSet {
 public:
  using Id = uint32_t;

  /// Grows the universe so that ids [0, n) exist as singletons.
  void ensure(size_t n) {
    size_t old = parent_.size();
    if (n <= old) return;
    parent_.resize(n);
    std::iota(parent_.begin() + static_cast<std::ptrdiff_t>(old), parent_.end(), static_cast<Id>(old));
    members_.resize(n);
    for (size_t i = old; i < n; ++i) members_[i] = {static_cast<Id>(i)};
  }

  size_t size() const { return parent_.size(); }

  /// Non-mutating so concurrent readers are safe; union by size keeps
  /// trees O(log n) deep.
  Id find(Id x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }

  /// Returns true when two distinct classes were merged.
  bool unite(Id a, Id b) {
    ensure(static_cast<size_t>(std::max(a, b)) + 1);
    Id ra = find(a);
    Id rb = find(b);
    if (ra == rb) return false;
    if (members_[ra].size() < members_[rb].size()) std::swap(ra, rb);
    parent_[rb] = ra;
    auto& dst = members_[ra];
    auto& src = members_[rb];
    dst.insert(dst.end(), src.begin(), src.end());
    src.clear();
    src.shrink_to_fit();
    return true;
  }

  bool same(Id a, Id b) const {
    if (a >= size() || b >= size()) return a == b;
    return find(a) == find(b);
  }

  /// Members of x's class in merge order; {x} for an unknown id.
  std::vector<Id> members(Id x) const {
    if (x >= size()) return {x};
    return members_[find(x)];
  }

 private:
  std::vector<Id> parent_;
  std::vector<std::vector<Id>> members_;
};

}  // namespace km4

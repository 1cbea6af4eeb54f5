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

#include "km4/similarity.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "km4/common.hpp"

namespace km4::similarity {

namespace {

std::vector<uint16_t> bigrams(std::string_view s) {
  std::vector<uint16_t> out;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    out.push_back(static_cast<uint16_t>((static_cast<unsigned char>(s[i]) << 8) |
                                        static_cast<unsigned char>(s[i + 1])));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <typename T>
size_t intersection_size(const std::vector<T>& a, const std::vector<T>& b) {
  size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

size_t levenshtein_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t up = row[j];
      size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

double dice(std::string_view a, std::string_view b) {
  auto ba = bigrams(a);
  auto bb = bigrams(b);
  if (ba.empty() && bb.empty()) return a == b ? 1.0 : 0.0;
  return 2.0 * static_cast<double>(intersection_size(ba, bb)) / static_cast<double>(ba.size() + bb.size());
}

double jaccard(std::string_view a, std::string_view b) {
  auto ta = split_whitespace(a);
  auto tb = split_whitespace(b);
  std::sort(ta.begin(), ta.end());
  ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
  std::sort(tb.begin(), tb.end());
  tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
  if (ta.empty() && tb.empty()) return 1.0;
  size_t inter = intersection_size(ta, tb);
  return static_cast<double>(inter) / static_cast<double>(ta.size() + tb.size() - inter);
}

}  // namespace km4::similarity

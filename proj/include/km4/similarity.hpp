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

#include <cstddef>
#include <string_view>

namespace km4::similarity {

/// Unit-cost edit distance over bytes.
size_t levenshtein_distance(std::string_view a, std::string_view b);

/// 1 - d / max(|a|, |b|); two empty strings give 1.
double levenshtein_similarity(std::string_view a, std::string_view b);

/// Sorensen-Dice over the sets of adjacent character pairs (no padding).
/// Strings with no pairs compare by equality.
double dice(std::string_view a, std::string_view b);

/// Jaccard over the sets of whitespace-separated tokens.
double jaccard(std::string_view a, std::string_view b);

}  // namespace km4::similarity

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

#include <doctest.h>

#include "fuzz.hpp"
#include "km4/similarity.hpp"
#include "oracles.hpp"

using namespace km4;
using namespace km4::similarity;

TEST_SUITE("similarity") {

TEST_CASE("known values") {
  CHECK(levenshtein_distance("kitten", "sitting") == 3);
  CHECK(levenshtein_distance("", "abc") == 3);
  CHECK(levenshtein_similarity("", "") == 1.0);
  CHECK(levenshtein_similarity("ROMA", "ROMA") == 1.0);
  CHECK(levenshtein_similarity("ROMA", "RIMA") == doctest::Approx(0.75));
  // {NI, IG, GH, HT} vs {NA, AC, CH, HT}: one shared pair.
  CHECK(dice("NIGHT", "NACHT") == doctest::Approx(0.25));
  CHECK(dice("A", "A") == 1.0);
  CHECK(dice("A", "B") == 0.0);
  CHECK(jaccard("VIA ROMA", "ROMA VIA") == 1.0);
  CHECK(jaccard("VIA ROMA", "VIA CAVOUR") == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard("", "") == 1.0);
}

TEST_CASE("metrics agree with reference implementations on fuzzed pairs") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    auto [a, b] = test::fuzzed_pair(rng);
    CHECK(levenshtein_distance(a, b) == oracle::levenshtein(a, b));
    CHECK(levenshtein_similarity(a, b) == doctest::Approx(oracle::levenshtein_similarity(a, b)));
    CHECK(dice(a, b) == doctest::Approx(oracle::dice(a, b)));
    CHECK(jaccard(a, b) == doctest::Approx(oracle::jaccard(a, b)));
  }
}

TEST_CASE("metric properties") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    auto [a, b] = test::fuzzed_pair(rng);
    auto [c, d] = test::fuzzed_pair(rng);
    (void)d;
    CHECK(levenshtein_distance(a, b) == levenshtein_distance(b, a));
    CHECK(levenshtein_distance(a, c) <= levenshtein_distance(a, b) + levenshtein_distance(b, c));
    for (double s : {levenshtein_similarity(a, b), dice(a, b), jaccard(a, b)}) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(dice(a, b) == dice(b, a));
    CHECK(jaccard(a, b) == jaccard(b, a));
    CHECK(dice(a, a) == 1.0);
    CHECK(jaccard(a, a) == 1.0);
  }
}

}  // TEST_SUITE

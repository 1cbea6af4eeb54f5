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

#include <random>

#include "km4/common.hpp"
#include "km4/evaluator.hpp"

using namespace km4;
using namespace km4::eval;
using reconcile::Level;
using reconcile::MatchCandidate;

namespace {

const std::string S = "http://example.org/svc/";
const std::string R = "http://example.org/road/";
const std::string N = "http://example.org/num/";

GoldAlignment gold3() {
  return GoldAlignment::parse(S + "1\t" + R + "a\t" + N + "a1\tnumber\n" +  //
                              S + "2\t" + R + "b\t-\tstreet\n" +            //
                              S + "3\t" + R + "c\t" + N + "c7\tnumber\n");
}

MatchCandidate link(const std::string& s, const std::string& r, std::optional<std::string> n) {
  MatchCandidate m;
  m.service = Iri(S + s);
  m.road = Iri(R + r);
  if (n) m.street_number = Iri(N + *n);
  m.level = n ? Level::kNumber : Level::kStreet;
  return m;
}

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("f1 is the harmonic mean") {
  CHECK(f1_score(0, 0) == 0.0);
  CHECK(f1_score(1, 1) == 1.0);
  CHECK(f1_score(0.5, 1.0) == doctest::Approx(2.0 / 3.0));
  // Rows whose printed F1 agrees with their printed P and R.
  CHECK(std::abs(f1_score(0.985, 0.722) - 0.833) <= 0.0005);
  CHECK(std::abs(f1_score(0.927, 0.508) - 0.656) <= 0.0005);
  CHECK(std::abs(f1_score(0.925, 0.714) - 0.806) <= 0.0005);
  // Harmonic means of the other two printed pairs.
  CHECK(f1_score(0.968, 0.674) == doctest::Approx(0.794680).epsilon(1e-6));
  CHECK(f1_score(1.000, 0.472) == doctest::Approx(0.641304).epsilon(1e-6));
}

TEST_CASE("gold parsing") {
  auto g = gold3();
  CHECK(g.entries.size() == 3);
  CHECK(GoldAlignment::parse(g.serialize()).entries == g.entries);
  CHECK_THROWS_AS(GoldAlignment::parse(S + "1\t" + R + "a\t-\tnumber\n"), Error);
  CHECK_THROWS_AS(GoldAlignment::parse(S + "1\t" + R + "a\t-\n"), Error);
  CHECK_THROWS_AS(GoldAlignment::parse(S + "1\t" + R + "a\t-\tstreet\n" + S + "1\t" + R + "b\t-\tstreet\n"), Error);
  CHECK_THROWS_AS(GoldAlignment::parse(S + "1\t" + R + "a\t-\tcounty\n"), Error);
}

TEST_CASE("scoring counts each gold entry at most once") {
  auto g = gold3();
  std::vector<MatchCandidate> links{
      link("1", "a", "a1"),         // tp
      link("1", "a", "a1"),         // identical: ignored
      link("1", "a", std::nullopt), // second correct link for service 1: neither tp nor fp
      link("2", "b", std::nullopt), // tp at street level
      link("3", "c", "c8"),         // wrong number: fp
      link("9", "z", std::nullopt), // not in gold: fp
  };
  auto m = score(links, g);
  CHECK(m.counts.tp == 2);
  CHECK(m.counts.fp == 2);
  CHECK(m.counts.fn == 1);
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(f1_score(0.5, 2.0 / 3.0)));
  CHECK(m.by_level[Level::kNumber].fn == 1);
  auto empty = score({}, g);
  CHECK(empty.no_predictions);
  CHECK(empty.precision == 0.0);
  CHECK(empty.counts.fn == 3);
}

TEST_CASE("street-level links to the right road are correct") {
  auto g = gold3();
  CHECK(is_true_positive(link("1", "a", std::nullopt), g));
  CHECK_FALSE(is_true_positive(link("1", "b", std::nullopt), g));
  CHECK_FALSE(is_true_positive(link("2", "b", "b1"), g));
}

TEST_CASE("scoring invariants on random predictions") {
  std::mt19937 rng(4);
  std::string text;
  for (int i = 0; i < 200; ++i) {
    text += S + std::to_string(i) + "\t" + R + std::to_string(i % 40) + "\t" + N + std::to_string(i) + "\tnumber\n";
  }
  auto g = GoldAlignment::parse(text);
  for (int round = 0; round < 50; ++round) {
    std::vector<MatchCandidate> links;
    size_t n = rng() % 300;
    for (size_t k = 0; k < n; ++k) {
      int s = static_cast<int>(rng() % 250);
      bool right = rng() % 2;
      links.push_back(link(std::to_string(s), std::to_string(right ? s % 40 : (s + 1) % 40),
                           right ? std::optional<std::string>(std::to_string(s)) : std::nullopt));
    }
    auto m = score(links, g);
    CHECK(m.counts.tp + m.counts.fn == g.entries.size());
    CHECK(m.precision >= 0.0);
    CHECK(m.precision <= 1.0);
    CHECK(m.recall <= 1.0);
    CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-12);
    CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-12);
    // Adding a correct link never lowers recall.
    links.push_back(link("0", "0", std::string("0")));
    CHECK(score(links, g).recall >= m.recall);
  }
}

TEST_CASE("simulated operator") {
  auto g = gold3();
  std::vector<reconcile::ReviewItem> queue;
  for (const char* s : {"1", "2", "3"}) {
    reconcile::ReviewItem item;
    item.id = s;
    item.service = Iri(S + s);
    item.candidates = {link(s, "wrong", std::nullopt), link(s, s == std::string("1") ? "a" : s == std::string("2") ? "b" : "c", std::nullopt)};
    queue.push_back(item);
  }
  auto perfect = simulate_operator(queue, g, ManualConfig{1.0, 1});
  REQUIRE(perfect.size() == 3);
  for (const auto& m : perfect) {
    CHECK(is_true_positive(m, g));
    CHECK(m.method == reconcile::Method::kManual);
  }
  auto hopeless = simulate_operator(queue, g, ManualConfig{0.0, 1});
  for (const auto& m : hopeless) CHECK_FALSE(is_true_positive(m, g));
  CHECK_THROWS_AS(simulate_operator(queue, g, ManualConfig{1.5, 1}), Error);
  CHECK(simulate_operator(queue, g, ManualConfig{0.5, 9}).size() == simulate_operator(queue, g, ManualConfig{0.5, 9}).size());
}

TEST_CASE("comparison table layout") {
  ComparisonRow row;
  row.label = "exact";
  row.metrics.precision = 1.0;
  row.metrics.recall = 0.5;
  row.metrics.f1 = f1_score(1.0, 0.5);
  row.metrics.counts = {5, 0, 5};
  auto tsv = comparison_tsv({row});
  CHECK(tsv == "Method\tP\tR\tF1\tTP\tFP\tFN\nexact\t1.000\t0.500\t0.667\t5\t0\t5\n");
  CHECK(all_methods().size() == 6);
  reconcile::ToponymCatalog empty;
  CHECK_THROWS_AS(compare_methods({}, empty, GoldAlignment{}, {"soundex"}), Error);
}

}  // TEST_SUITE

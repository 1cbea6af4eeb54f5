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

#include <algorithm>
#include <random>

#include "km4/common.hpp"
#include "km4/geo.hpp"
#include "oracles.hpp"

using namespace km4;
using namespace km4::geo;

TEST_SUITE("geo") {

TEST_CASE("haversine matches the reference formula") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> lat(-89, 89), lon(-179.9, 179.9);
  for (int i = 0; i < 1000; ++i) {
    double a = lat(rng), b = lon(rng), c = lat(rng), d = lon(rng);
    CHECK(haversine_meters({a, b}, {c, d}) == doctest::Approx(oracle::haversine(a, b, c, d)).epsilon(1e-9));
  }
  // One degree of latitude.
  CHECK(haversine_meters({43, 11}, {44, 11}) == doctest::Approx(111195.08).epsilon(1e-6));
}

TEST_CASE("coordinate validation") {
  CHECK(GeoPoint::is_valid(90, 180));
  CHECK_FALSE(GeoPoint::is_valid(90.5, 0));
  CHECK_FALSE(GeoPoint::is_valid(0, -181));
  CHECK_THROWS_AS(GeoPoint::make(91, 0), Error);
}

TEST_CASE("grid nearest equals a full scan") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> lat(43.70, 43.85), lon(11.15, 11.35);
  GridIndex idx;
  std::vector<GeoPoint> pts;
  for (uint32_t i = 0; i < 2000; ++i) {
    // A few exact duplicates to exercise ties.
    GeoPoint p = (i % 97 == 0 && i > 0) ? pts[i - 1] : GeoPoint{lat(rng), lon(rng)};
    pts.push_back(p);
    idx.upsert(i, p);
  }
  for (int qn = 0; qn < 100; ++qn) {
    GeoPoint q{lat(rng), lon(rng)};
    size_t k = 1 + rng() % 25;
    double maxd = qn % 3 == 0 ? 400.0 : 1e9;
    std::vector<double> dist;
    for (const auto& p : pts) {
      double d = oracle::haversine(q.lat, q.lon, p.lat, p.lon);
      if (d <= maxd) dist.push_back(d);
    }
    std::sort(dist.begin(), dist.end());
    auto got = idx.nearest(q, k, maxd);
    size_t want_n = std::min(k, dist.size());
    REQUIRE(got.size() >= want_n);
    for (size_t i = 0; i < want_n; ++i) CHECK(got[i].distance == doctest::Approx(dist[i]).epsilon(1e-9));
    // Extra results only when tied with the k-th.
    for (size_t i = want_n; i < got.size(); ++i) CHECK(got[i].distance == doctest::Approx(dist[want_n - 1]));
  }
}

TEST_CASE("upsert moves and erase removes") {
  GridIndex idx;
  idx.upsert(1, {43.0, 11.0});
  idx.upsert(1, {44.0, 12.0});
  CHECK(idx.size() == 1);
  auto near = idx.nearest({44.0, 12.0}, 1);
  REQUIRE(near.size() == 1);
  CHECK(near[0].distance == doctest::Approx(0.0));
  idx.erase(1);
  CHECK(idx.nearest({44.0, 12.0}, 5).empty());
  CHECK_FALSE(idx.position(1));
}

TEST_CASE("cells across the antimeridian and poles") {
  GridIndex idx;
  idx.upsert(1, {0.0, 179.999});
  idx.upsert(2, {0.0, -179.999});
  idx.upsert(3, {89.999, 0.0});
  auto hits = idx.nearest({0.0, 179.999}, 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[1].id == 2);
  CHECK(hits[1].distance < 300);
  CHECK(idx.nearest({89.999, 90.0}, 1)[0].id == 3);
}

}  // TEST_SUITE

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

#include <set>

#include "km4/common.hpp"
#include "km4/ingestion.hpp"
#include "km4/realtime.hpp"
#include "km4/vocab.hpp"
#include "support.hpp"

using namespace km4;
using namespace km4::realtime;
using km4::test::data_path;

namespace {

const Iri kCtx(ingest::dataset_context_iri("feed"));

std::vector<Quad> run(const std::string& fixture, std::optional<PayloadType> forced) {
  std::vector<Quad> all;
  for (const auto& p : parse_payloads(read_file(data_path("fixtures/feeds/" + fixture)), forced)) {
    auto q = ingest_realtime(p, "feed", kCtx);
    all.insert(all.end(), q.begin(), q.end());
  }
  return all;
}

std::set<std::string> subjects_of(const std::vector<Quad>& quads, const std::string& cls) {
  std::set<std::string> out;
  for (const auto& q : quads) {
    if (q.predicate.str() == vocab::kRdfType && q.object.value() == vocab::km4c(cls)) out.insert(q.subject.str());
  }
  return out;
}

std::vector<std::string> objects(const std::vector<Quad>& quads, const std::string& s, const std::string& p) {
  std::vector<std::string> out;
  for (const auto& q : quads) {
    if (q.subject.str() == s && q.predicate.str() == p) out.push_back(q.object.value());
  }
  return out;
}

}  // namespace

TEST_SUITE("realtime") {

TEST_CASE("payload parsing") {
  auto ps = parse_payloads(R"([{"type":"parking","carPark":"a","timestamp":"2015-03-01T10:00:00Z","free":1,"occupied":2}])");
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].type == PayloadType::kParking);
  CHECK_THROWS_AS(parse_payloads(R"({"carPark":"a"})"), Error);
  CHECK_THROWS_AS(parse_payloads(R"({"type":"teleport"})"), Error);
  CHECK_THROWS_AS(parse_payloads("not json"), Error);
  auto round = payload_from_fields(payload_fields(ps[0]));
  CHECK(round.type == ps[0].type);
  CHECK(round.body == ps[0].body);
}

TEST_CASE("parking records at one time get distinct instants") {
  auto quads = run("parking.json", PayloadType::kParking);
  auto records = subjects_of(quads, "SituationRecord");
  CHECK(records.size() == 2);
  auto instants = subjects_of(quads, "Instant");
  CHECK(instants.size() == 2);
  for (const auto& r : records) {
    auto links = objects(quads, r, vocab::km4c("observationTime"));
    REQUIRE(links.size() == 1);
    CHECK(instants.count(links[0]) == 1);
    CHECK(objects(quads, links[0], vocab::km4c("instantParking")) == std::vector<std::string>{r});
  }
  // Instants live in the companion context.
  for (const auto& q : quads) {
    if (instants.count(q.subject.str())) CHECK(q.context.str() == instants_context(kCtx.str()));
  }
}

TEST_CASE("avm record with three forecasts") {
  auto quads = run("avm.json", PayloadType::kAvm);
  auto records = subjects_of(quads, "AVMRecord");
  REQUIRE(records.size() == 1);
  const auto& rec = *records.begin();
  CHECK(objects(quads, rec, vocab::km4c("hasForecast")).size() == 3);
  CHECK(subjects_of(quads, "BusStopForecast").size() == 3);
  CHECK(subjects_of(quads, "Instant").size() == 4);
  CHECK(objects(quads, rec, vocab::km4c("delay")) == std::vector<std::string>{"95"});
  CHECK(objects(quads, rec, std::string(vocab::kGeoLat)) == std::vector<std::string>{"43.7766"});
  // Every forecast is schema-valid.
  const auto& s = schema::load_schema();
  for (const auto& f : subjects_of(quads, "BusStopForecast")) {
    auto v = schema::validate_entity(s, quads, "BusStopForecast", f);
    CHECK(v.empty());
  }
}

TEST_CASE("missing or malformed timestamps are rejected") {
  Payload p{PayloadType::kParking, {{"carPark", "a"}, {"free", 1}, {"occupied", 2}}};
  CHECK_THROWS_AS(ingest_realtime(p, "feed", kCtx), Error);
  p.body["timestamp"] = "yesterday";
  CHECK_THROWS_AS(ingest_realtime(p, "feed", kCtx), Error);
  p.body["timestamp"] = "2015-03-01T10:00:00Z";
  CHECK_NOTHROW(ingest_realtime(p, "feed", kCtx));
  p.body["free"] = "lots";
  CHECK_THROWS_AS(ingest_realtime(p, "feed", kCtx), Error);
  Payload obs{PayloadType::kObservation,
              {{"sensor", "s"}, {"kind", "Vibes"}, {"timestamp", "2015-03-01T10:00:00Z"}, {"value", 1}}};
  CHECK_THROWS_AS(ingest_realtime(obs, "feed", kCtx), Error);
}

TEST_CASE("observations take their kind as class") {
  auto quads = run("observation.json", PayloadType::kObservation);
  CHECK(subjects_of(quads, "TrafficSpeed").size() == 1);
  CHECK(subjects_of(quads, "TrafficFlow").size() == 1);
  CHECK(subjects_of(quads, "SensorSite").size() == 1);
}

TEST_CASE("weather reports resolve municipality aliases") {
  auto table = ingest::IstatTable::load(data_path("istat.tsv"));
  auto ps = parse_payloads(read_file(data_path("fixtures/feeds/weather.json")), PayloadType::kWeather);
  REQUIRE(ps.size() == 1);
  auto done = complete_weather_istat(ps[0], table);
  CHECK_FALSE(done.flagged);
  CHECK(done.payload.body["istatCode"] == "048049");
  auto quads = ingest_realtime(done.payload, "feed", kCtx);
  auto reports = subjects_of(quads, "WeatherReport");
  REQUIRE(reports.size() == 1);
  CHECK(objects(quads, *reports.begin(), vocab::km4c("refersToMunicipality")) ==
        std::vector<std::string>{municipality_iri("048049")});
  CHECK(subjects_of(quads, "WeatherPrediction").size() == 2);

  Payload unknown = ps[0];
  unknown.body["municipality"] = "Atlantis";
  auto flagged = complete_weather_istat(unknown, table);
  CHECK(flagged.flagged);
  CHECK(flagged.payload.body == unknown.body);
}

TEST_CASE("payload keys are stable per resource and time") {
  Payload a{PayloadType::kParking, {{"carPark", "x"}, {"timestamp", "2015-03-01T10:00:00Z"}, {"free", 1}}};
  Payload b = a;
  b.body["free"] = 2;
  CHECK(payload_key(a) == payload_key(b));
  b.body["carPark"] = "y";
  CHECK(payload_key(a) != payload_key(b));
}

}  // TEST_SUITE

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

#include "km4/common.hpp"
#include "km4/ingestion.hpp"
#include "km4/vocab.hpp"
#include "support.hpp"

using namespace km4;
using namespace km4::ingest;
using km4::test::data_path;
using km4::test::TempDir;

namespace {

const DateTime kNow = parse_datetime("2015-03-02T10:00:00+01:00");

DatasetDescriptor fixture_descriptor(const std::string& dir, const std::string& name) {
  return DatasetDescriptor::parse(read_file(data_path("fixtures/" + dir + "/" + name + ".descriptor")));
}

MappingSpec fixture_mapping(const std::string& dir, const std::string& name) {
  return MappingSpec::parse(read_file(data_path("fixtures/" + dir + "/" + name + ".mapping")));
}

struct Env {
  store::QuadStore store;
  StagingStore staging;
  Pipeline pipeline{store, staging};
};

size_t count_type(const store::QuadStore& st, const std::string& cls) {
  store::Pattern p;
  p.predicate = Iri(std::string(vocab::kRdfType));
  p.object = Term::iri(vocab::km4c(cls));
  return st.count(p);
}

StagedRecord staged(FieldMap raw) {
  StagedRecord r;
  r.dataset_id = "t";
  r.record_key = "k";
  r.raw_fields = std::move(raw);
  return r;
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("descriptor round trip and validation") {
  auto d = fixture_descriptor("services", "services");
  CHECK(d.id == "firenze-services");
  CHECK(d.process_type == ProcessType::kSemiStatic);
  CHECK(d.update_period.months == 1);
  CHECK(d.macroclass == schema::MacroClass::kPointOfInterest);
  CHECK(DatasetDescriptor::parse(d.serialize()) == d);
  CHECK_NOTHROW(d.validate());

  auto rt = fixture_descriptor("weather", "weather");
  rt.update_period = parse_duration("P2D");
  CHECK_THROWS_AS(rt.validate(), Error);
  rt.update_period = Duration{};
  CHECK_THROWS_AS(rt.validate(), Error);

  auto bad = d;
  bad.id = "has space";
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(DatasetDescriptor::parse("id=x\nbogusKey=1\n"), Error);
  CHECK_THROWS_AS(DatasetDescriptor::parse("id=x\ncreationDate=2015-03-01\noriginalFormat=PDF\n"), Error);
}

TEST_CASE("status transitions are forward-only with retry") {
  using S = DatasetStatus;
  CHECK(can_transition(S::kRegistered, S::kIngested));
  CHECK(can_transition(S::kIngested, S::kImproved));
  CHECK(can_transition(S::kImproved, S::kMapped));
  CHECK(can_transition(S::kMapped, S::kIndexed));
  CHECK(can_transition(S::kIndexed, S::kIngested));
  CHECK(can_transition(S::kMapped, S::kFailed));
  CHECK(can_transition(S::kFailed, S::kIngested));
  CHECK_FALSE(can_transition(S::kMapped, S::kImproved));
  CHECK(can_transition(S::kRegistered, S::kIndexed));
  CHECK_FALSE(can_transition(S::kIndexed, S::kRegistered));
}

TEST_CASE("mapping validation names the offending item") {
  const auto& s = schema::load_schema();
  CHECK_NOTHROW(fixture_mapping("roads", "roads").validate(s));
  auto bad = MappingSpec::parse("DATASET\tx\nCLASS\nr\tSpaceship\tid\n");
  try {
    bad.validate(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("Spaceship") != std::string::npos);
  }
  auto undeclared = MappingSpec::parse("DATASET\tx\nCLASS\nr\tRoad\tid\nPROP\nq\tname\tname\tstring\n");
  CHECK_THROWS_AS(undeclared.validate(s), Error);
  auto kind = MappingSpec::parse("DATASET\tx\nCLASS\nr\tRoad\tid\nPROP\nr\tcontainsElement\tx\tstring\n");
  CHECK_THROWS_AS(kind.validate(s), Error);
  auto m = fixture_mapping("roads", "roads");
  CHECK(MappingSpec::parse(m.serialize()).serialize() == m.serialize());
}

TEST_CASE("csv parsing detects the delimiter and reports row and column") {
  auto t = parse_csv("a;b;c\n1;\"x;y\";3\n\n4;5;6\n");
  CHECK(t.columns == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(*find_field(t.rows[0], "b") == "x;y");
  try {
    parse_csv("a,b\n1,2\n3\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_csv("a,b\n\"open,2\n"), Error);
  CHECK_THROWS_AS(parse_csv(""), Error);
}

TEST_CASE("xml records become rows") {
  auto t = parse_xml("<rows><row><id>1</id><name>A</name></row><row><id>2</id><extra>x</extra></row></rows>");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.columns == std::vector<std::string>{"id", "name", "extra"});
  CHECK_THROWS_AS(parse_xml("<rows><row><id>1</id></rows>"), Error);
}

TEST_CASE("a parse failure marks the dataset failed and retry recovers") {
  TempDir dir;
  Env env;
  auto d = fixture_descriptor("roads", "roads");
  env.pipeline.register_dataset(d, fixture_mapping("roads", "roads"));
  write_file(dir.file("bad.csv"), "road_code;road_name\nR1\n");
  CHECK_THROWS_AS(env.pipeline.ingest_file(d.id, dir.file("bad.csv"), kNow), Error);
  CHECK(env.pipeline.descriptor(d.id).status == DatasetStatus::kFailed);
  auto report = env.pipeline.process_file(d.id, data_path("fixtures/roads/roads.csv"), kNow);
  CHECK(report.status == DatasetStatus::kIndexed);
  CHECK(env.pipeline.descriptor(d.id).status == DatasetStatus::kIndexed);
}

TEST_CASE("quality rules normalize values and keep the raw fields") {
  RuleSet rules;
  rules.column_rules["date"] = {"date"};
  rules.column_rules["cap"] = {"cap"};
  rules.column_rules["phone"] = {"phone"};
  rules.column_rules["email"] = {"email"};
  rules.column_rules["civic"] = {"civic"};
  rules.column_rules["addr"] = {"address"};
  rules.column_rules["ateco"] = {"ateco"};
  auto rec = staged({{"date", "01/03/2015"}, {"cap", "5014"}, {"phone", "055 123456"}, {"email", " Info@X.IT "},
                     {"civic", "3 rosso"}, {"addr", "P.zza S. Croce"}, {"ateco", "55.10.0"}, {"other", "  x "}});
  auto out = quality_improve(rec, rules, address::QualifierTable::seed());
  CHECK(out.raw_fields == rec.raw_fields);
  CHECK(*find_field(out.clean_fields, "date") == "2015-03-01");
  CHECK(*find_field(out.clean_fields, "cap") == "5014");
  CHECK(*find_field(out.clean_fields, "phone") == "+39055123456");
  CHECK(*find_field(out.clean_fields, "email") == "info@x.it");
  CHECK(*find_field(out.clean_fields, "civic") == "3/R");
  CHECK(*find_field(out.clean_fields, "addr") == "PIAZZA SANTA CROCE");
  CHECK(*find_field(out.clean_fields, "ateco") == "55.10.0");
  CHECK(*find_field(out.clean_fields, "other") == "x");
  auto flagged = std::find_if(out.change_log.begin(), out.change_log.end(),
                              [](const Change& c) { return c.column == "cap"; });
  REQUIRE(flagged != out.change_log.end());
  CHECK(flagged->rule_id == "flag-only");
  CHECK(flagged->before == flagged->after);
  // Pure: applying twice gives the same result.
  CHECK(quality_improve(rec, rules, address::QualifierTable::seed()) == out);
}

TEST_CASE("quality rules are idempotent on their own output") {
  RuleSet rules;
  rules.column_rules["date"] = {"date"};
  rules.column_rules["civic"] = {"civic"};
  rules.column_rules["addr"] = {"address"};
  auto table = address::QualifierTable::seed();
  for (const char* date : {"01/03/2015", "1-3-2015 8:05", "2015-03-01", "31/02/2015", "junk"}) {
    for (const char* civic : {"12/r", "5/a", "snc", "12-14", "??"}) {
      auto once = quality_improve(staged({{"date", date}, {"civic", civic}, {"addr", "VL. Europa"}}), rules, table);
      auto twice = quality_improve(staged(once.clean_fields), rules, table);
      CHECK(twice.clean_fields == once.clean_fields);
    }
  }
}

TEST_CASE("rules are inferred from the mapping") {
  auto rules = RuleSet::from_mapping(fixture_mapping("services", "services"));
  CHECK(rules.column_rules["cap"] == std::vector<std::string>{"cap"});
  CHECK(rules.column_rules["civic"] == std::vector<std::string>{"civic"});
  CHECK(rules.column_rules["municipality"] == std::vector<std::string>{"locality"});
  CHECK(rules.column_rules.count("code") == 1);
}

TEST_CASE("staging keeps versions and ignores identical raw fields") {
  TempDir dir;
  auto file = dir.path() / "staging.jsonl";
  {
    StagingStore st(file);
    auto v1 = st.put("d", "k", {{"a", "1"}}, kNow);
    auto same = st.put("d", "k", {{"a", "1"}}, kNow);
    CHECK(v1.version == 1);
    CHECK(same.version == 1);
    auto v2 = st.put("d", "k", {{"a", "2"}}, kNow);
    CHECK(v2.version == 2);
    v2.clean_fields = {{"a", "two"}};
    st.update(v2);
    auto tampered = v2;
    tampered.raw_fields = {{"a", "3"}};
    CHECK_THROWS_AS(st.update(tampered), Error);
  }
  StagingStore again(file);
  CHECK(again.size("d") == 2);
  auto hist = again.history("d", "k");
  REQUIRE(hist.size() == 2);
  CHECK(hist[0].raw_fields == FieldMap{{"a", "1"}});
  CHECK(again.latest("d", "k")->clean_fields == FieldMap{{"a", "two"}});
}

TEST_CASE("roads fixture maps to valid street-guide entities") {
  Env env;
  auto ctx = env.pipeline.register_dataset(fixture_descriptor("roads", "roads"), fixture_mapping("roads", "roads"));
  CHECK(ctx.str() == dataset_context_iri("firenze-roads"));
  auto report = env.pipeline.process_file("firenze-roads", data_path("fixtures/roads/roads.csv"), kNow);
  CHECK(report.rows == 11);
  CHECK(count_type(env.store, "Road") == 7);
  CHECK(count_type(env.store, "StreetNumber") == 11);
  CHECK(count_type(env.store, "Entry") == 11);
  auto tag = env.store.context_tag(ctx);
  REQUIRE(tag);
  CHECK(tag->macroclass == schema::MacroClass::kStreetGuide);
  CHECK(tag->utc_offset_minutes == 60);
  // Entries are geolocated.
  auto near = env.store.geo_near(geo::GeoPoint::make(43.7745, 11.2575), 1, 10);
  REQUIRE(near.size() == 1);
  CHECK(near[0].entity.str() == mint_iri("firenze-roads", "entry", {"E001"}));
  // Re-processing the same file adds nothing.
  auto again = env.pipeline.process_file("firenze-roads", data_path("fixtures/roads/roads.csv"), kNow);
  CHECK(again.new_versions == 0);
  CHECK(again.quads_inserted == 0);
}

TEST_CASE("two roles of the same class get distinct IRIs") {
  Env env;
  auto d = fixture_descriptor("roads", "roads");
  d.id = "two-entries";
  auto m = MappingSpec::parse(
      "DATASET\ttwo-entries\nCLASS\nnum\tStreetNumber\tnumber_code\nfront\tEntry\tentry_code\n"
      "back\tEntry\tnumber_code,entry_code\nPROP\nnum\tnumber\tnumber\tstring\n"
      "LINK\nnum\thasExternalAccess\tfront\nnum\thasInternalAccess\tback\n");
  env.pipeline.register_dataset(d, m);
  env.pipeline.process_file(d.id, data_path("fixtures/roads/roads.csv"), kNow);
  CHECK(count_type(env.store, "Entry") == 22);
  CHECK(mint_iri("two-entries", "front", {"E001"}) != mint_iri("two-entries", "back", {"N001", "E001"}));
}

TEST_CASE("service categories materialize subclasses") {
  Env env;
  env.pipeline.register_dataset(fixture_descriptor("services", "services"), fixture_mapping("services", "services"));
  auto report = env.pipeline.process_file("firenze-services", data_path("fixtures/services/services.csv"), kNow);
  CHECK(count_type(env.store, "Service") == 5);
  CHECK(count_type(env.store, "Accommodation") == 4);
  bool museum_noted = std::any_of(report.diagnostics.begin(), report.diagnostics.end(),
                                  [](const std::string& d) { return d.find("museum") != std::string::npos; });
  CHECK(museum_noted);
  // S003 has a four-digit CAP: kept verbatim.
  auto rec = env.staging.latest("firenze-services", "S003");
  REQUIRE(rec);
  CHECK(*find_field(rec->clean_fields, "cap") == "5012");
}

TEST_CASE("ingestion is deterministic") {
  std::string first;
  for (int run = 0; run < 2; ++run) {
    Env env;
    env.pipeline.register_dataset(fixture_descriptor("roads", "roads"), fixture_mapping("roads", "roads"));
    env.pipeline.register_dataset(fixture_descriptor("services", "services"),
                                  fixture_mapping("services", "services"));
    env.pipeline.process_file("firenze-roads", data_path("fixtures/roads/roads.csv"), kNow);
    env.pipeline.process_file("firenze-services", data_path("fixtures/services/services.csv"), kNow);
    auto out = env.store.export_nquads();
    if (run == 0) first = out;
    else CHECK(out == first);
  }
}

TEST_CASE("descriptor metadata is queryable") {
  Env env;
  env.pipeline.register_dataset(fixture_descriptor("roads", "roads"), fixture_mapping("roads", "roads"));
  env.pipeline.process_file("firenze-roads", data_path("fixtures/roads/roads.csv"), kNow);
  auto back = descriptor_from_store(env.store, "firenze-roads");
  REQUIRE(back);
  CHECK(back->status == DatasetStatus::kIndexed);
  CHECK(back->last_update == kNow);
  CHECK(back->license == "CC-BY-4.0");
  CHECK_THROWS_AS(env.pipeline.register_dataset(fixture_descriptor("roads", "roads"), fixture_mapping("roads", "roads")),
                  Error);
}

TEST_CASE("polylines become junctions and road links") {
  Env env;
  env.pipeline.register_dataset(fixture_descriptor("polyline", "polyline"), fixture_mapping("polyline", "polyline"));
  auto report = env.pipeline.process_file("firenze-graph", data_path("fixtures/polyline/viale.txt"), kNow);
  CHECK(count_type(env.store, "Junction") == 4);  // shared point counted once
  CHECK(count_type(env.store, "RoadLink") == 3);
  CHECK(report.diagnostics.empty());
  CHECK_THROWS_AS(parse_polyline("11.2,43.7\n"), Error);
  CHECK_THROWS_AS(parse_polyline("ELEMENT X\n11.2;43.7\n"), Error);
}

TEST_CASE("istat table resolves names and aliases") {
  auto t = IstatTable::load(data_path("istat.tsv"));
  CHECK(t.lookup("Firenze") == "048017");
  CHECK(t.lookup("FLORENCE") == "048017");
  CHECK(t.lookup("vicchio del mugello") == "048049");
  CHECK_FALSE(t.lookup("Atlantis"));
  CHECK(t.name_of("048049") == "Vicchio");
  CHECK_THROWS_AS(IstatTable::parse("lonely\n"), Error);
}

}  // TEST_SUITE

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
#include "km4/schema.hpp"
#include "km4/vocab.hpp"

using namespace km4;
using namespace km4::schema;

namespace {

const std::string kCtx = "http://example.org/ctx";

Quad q(const std::string& s, const std::string& prop, Term o) {
  return make_quad(s, load_schema().property_iri(prop), std::move(o), kCtx);
}

Term dec(const std::string& v) { return Term::literal(v, Datatype::kDecimal); }

bool has_error(const std::vector<ViolationReport>& v, const std::string& property) {
  return std::any_of(v.begin(), v.end(), [&](const ViolationReport& r) {
    return r.severity == Severity::kError && r.constraint.property == property;
  });
}

size_t errors(const std::vector<ViolationReport>& v) {
  return static_cast<size_t>(
      std::count_if(v.begin(), v.end(), [](const ViolationReport& r) { return r.severity == Severity::kError; }));
}

}  // namespace

TEST_SUITE("schema") {

TEST_CASE("macroclass coverage and lookup") {
  const auto& s = load_schema();
  for (auto m : kAllMacroClasses) {
    CHECK(macroclass_from_string(to_string(m)) == m);
    bool any = std::any_of(s.classes().begin(), s.classes().end(),
                           [&](const ClassDef& c) { return c.macroclass == m; });
    CHECK_MESSAGE(any, to_string(m));
  }
  for (const char* name : {"Road", "RoadElement", "Node", "StreetNumber", "Entry", "Service", "BusStop", "Ride",
                           "AVMRecord", "WeatherReport", "Instant", "Dataset", "Municipality"}) {
    CHECK_MESSAGE(s.find_class(name) != nullptr, name);
  }
  CHECK_THROWS_AS(s.get_class("Spaceship"), Error);
  CHECK(s.class_iri("Road") == vocab::km4c("Road"));
}

TEST_CASE("subclasses inherit their parent's constraints") {
  const auto& s = load_schema();
  CHECK(s.is_subclass_of("Accommodation", "Service"));
  CHECK_FALSE(s.is_subclass_of("Service", "Accommodation"));
  CHECK(s.lineage("TrafficSpeed").size() == 2);
  auto cons = s.effective_constraints("Accommodation");
  auto has = [&](const char* p) {
    return std::any_of(cons.begin(), cons.end(), [&](const PropertyConstraint& c) { return c.property == p; });
  };
  CHECK(has("hasAccess"));
  CHECK(has("serviceCategory"));
}

TEST_CASE("finalize rejects broken definitions") {
  Schema bad;
  bad.add_class(ClassDef{"A", MacroClass::kAdministration, "B", {}});
  bad.add_class(ClassDef{"B", MacroClass::kAdministration, "A", {}});
  CHECK_THROWS_AS(bad.finalize(), Error);

  Schema orphan;
  orphan.add_class(ClassDef{"A", MacroClass::kAdministration, "Missing", {}});
  CHECK_THROWS_AS(orphan.finalize(), Error);

  Schema dup;
  dup.add_class(ClassDef{"A", MacroClass::kAdministration, std::nullopt, {}});
  CHECK_THROWS_AS(dup.add_class(ClassDef{"A", MacroClass::kAdministration, std::nullopt, {}}), Error);

  Schema card;
  card.add_class(ClassDef{"A", MacroClass::kAdministration, std::nullopt,
                          {PropertyConstraint{"p", PropertyKind::kData, "string", 2, 1, {}, Severity::kError}}});
  CHECK_THROWS_AS(card.finalize(), Error);
}

TEST_CASE("Node needs exactly one lat and one long") {
  const auto& s = load_schema();
  std::string n = "http://example.org/node/1";
  std::vector<Quad> good{q(n, "lat", dec("43.77")), q(n, "long", dec("11.25"))};
  CHECK(errors(validate_entity(s, good, "Node", n)) == 0);

  std::vector<Quad> missing{q(n, "lat", dec("43.77"))};
  CHECK(has_error(validate_entity(s, missing, "Node", n), "long"));

  auto twice = good;
  twice.push_back(q(n, "lat", dec("43.78")));
  auto v = validate_entity(s, twice, "Node", n);
  REQUIRE(has_error(v, "lat"));
  CHECK(v.front().observed_count == 2);
}

TEST_CASE("Road needs at least one element") {
  const auto& s = load_schema();
  std::string r = "http://example.org/road/1";
  std::vector<Quad> good{q(r, "containsElement", Term::iri("http://example.org/re/1")),
                         q(r, "containsElement", Term::iri("http://example.org/re/2"))};
  CHECK(errors(validate_entity(s, good, "Road", r)) == 0);
  std::vector<Quad> bad{q(r, "inMunicipalityOf", Term::iri("http://example.org/m/1"))};
  CHECK(has_error(validate_entity(s, bad, "Road", r), "containsElement"));
}

TEST_CASE("Milestone sits on exactly one administrative road") {
  const auto& s = load_schema();
  std::string m = "http://example.org/ms/1";
  std::vector<Quad> good{q(m, "isInElement", Term::iri("http://example.org/ar/1"))};
  CHECK(errors(validate_entity(s, good, "Milestone", m)) == 0);
  std::vector<Quad> none{q(m, "lat", dec("43.7"))};
  CHECK(has_error(validate_entity(s, none, "Milestone", m), "isInElement"));
  auto two = good;
  two.push_back(q(m, "isInElement", Term::iri("http://example.org/ar/2")));
  CHECK(has_error(validate_entity(s, two, "Milestone", m), "isInElement"));
}

TEST_CASE("Ride is scheduled on exactly one line") {
  const auto& s = load_schema();
  std::string r = "http://example.org/ride/1";
  std::vector<Quad> good{q(r, "scheduledOnLine", Term::iri("http://example.org/line/4"))};
  CHECK(errors(validate_entity(s, good, "Ride", r)) == 0);
  std::vector<Quad> none;
  CHECK(has_error(validate_entity(s, none, "Ride", r), "scheduledOnLine"));
}

TEST_CASE("BusStop needs coordinates") {
  const auto& s = load_schema();
  std::string b = "http://example.org/stop/1";
  std::vector<Quad> good{q(b, "lat", dec("43.7")), q(b, "long", dec("11.2"))};
  CHECK(errors(validate_entity(s, good, "BusStop", b)) == 0);
  std::vector<Quad> bad{q(b, "long", dec("11.2"))};
  CHECK(has_error(validate_entity(s, bad, "BusStop", b), "lat"));
}

TEST_CASE("Service has at most one access") {
  const auto& s = load_schema();
  std::string sv = "http://example.org/svc/1";
  std::vector<Quad> good{q(sv, "hasAccess", Term::iri("http://example.org/entry/1")),
                         q(sv, "isInRoad", Term::iri("http://example.org/road/1"))};
  CHECK(errors(validate_entity(s, good, "Service", sv)) == 0);
  auto bad = good;
  bad.push_back(q(sv, "hasAccess", Term::iri("http://example.org/entry/2")));
  auto v = validate_entity(s, bad, "Service", sv);
  REQUIRE(has_error(v, "hasAccess"));
  CHECK(v.front().constraint.max_card == 1);
  // Inherited by every subclass.
  CHECK(has_error(validate_entity(s, bad, "Healthcare", sv), "hasAccess"));
}

TEST_CASE("category values are checked against the allowed list") {
  const auto& s = load_schema();
  std::string sv = "http://example.org/svc/2";
  std::vector<Quad> good{q(sv, "serviceCategory", Term::iri(vocab::km4c("hotel")))};
  CHECK(errors(validate_entity(s, good, "Accommodation", sv)) == 0);
  std::vector<Quad> bad{q(sv, "serviceCategory", Term::iri(vocab::km4c("museum")))};
  auto v = validate_entity(s, bad, "Accommodation", sv);
  REQUIRE(v.size() == 1);
  CHECK(v[0].offending_values == std::vector<std::string>{"museum"});
  CHECK(classify_service(s, "hotel") == "Accommodation");
  CHECK(classify_service(s, "museum") == "Service");
  CHECK_FALSE(is_known_service_category(s, "museum"));
}

TEST_CASE("warnings do not count as errors") {
  const auto& s = load_schema();
  std::string n = "http://example.org/sn/1";
  std::vector<Quad> partial{q(n, "number", Term::literal("12"))};
  auto v = validate_entity(s, partial, "StreetNumber", n);
  REQUIRE_FALSE(v.empty());
  CHECK(errors(v) == 0);
}

TEST_CASE("adding unrelated facts never adds violations") {
  // Property: violations of a valid entity depend only on constrained
  // properties.
  const auto& s = load_schema();
  std::string n = "http://example.org/node/9";
  std::vector<Quad> quads{q(n, "lat", dec("43.77")), q(n, "long", dec("11.25"))};
  for (int i = 0; i < 20; ++i) {
    quads.push_back(make_quad(n, "http://example.org/extra/" + std::to_string(i), Term::literal("x"), kCtx));
    quads.push_back(q("http://example.org/other/" + std::to_string(i), "lat", dec("1")));
    CHECK(validate_entity(s, quads, "Node", n).empty());
  }
}

TEST_CASE("entity inference picks the root subject") {
  const auto& s = load_schema();
  std::string sv = "http://example.org/svc/3";
  std::string e = "http://example.org/entry/3";
  std::vector<Quad> quads{q(e, "lat", dec("1")), q(sv, "hasAccess", Term::iri(e)),
                          q(sv, "hasAccess", Term::iri("http://example.org/entry/4"))};
  auto v = validate_entity(s, quads, "Service");
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity == sv);
}

TEST_CASE("dump lists every class") {
  const auto& s = load_schema();
  auto text = s.dump();
  CHECK(split(trim(text), '\n').size() == s.classes().size());
  CHECK(text.find("Node\tStreetGuide\t-\tlat[1..1]; long[1..1]") != std::string::npos);
  CHECK(build_schema() == s);
}

}  // TEST_SUITE

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
#include "km4/quad.hpp"
#include "km4/time.hpp"
#include "oracles.hpp"

using namespace km4;

TEST_SUITE("common") {

TEST_CASE("string helpers") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(split("a;;b", ';') == std::vector<std::string>{"a", "", "b"});
  CHECK(split_whitespace("  VIA   ROMA ") == std::vector<std::string>{"VIA", "ROMA"});
  CHECK(join({"x", "y"}, ", ") == "x, y");
  CHECK(percent_decode(percent_encode("<a b>/é?")) == "<a b>/é?");
  CHECK(percent_encode("a-b_c.d~") == "a-b_c.d~");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(45.0) == "45");
}

TEST_CASE("iri validation") {
  CHECK(Iri::is_valid("http://example.org/x"));
  CHECK(Iri::is_valid("urn:km4:context:metadata"));
  CHECK_FALSE(Iri::is_valid("no scheme"));
  CHECK_FALSE(Iri::is_valid("http://a b"));
  CHECK_FALSE(Iri::is_valid(""));
  CHECK_THROWS_AS(Iri("http://x/<y>"), Error);
}

TEST_CASE("literals are validated against their datatype") {
  CHECK(Literal::is_valid("12", Datatype::kInteger));
  CHECK_FALSE(Literal::is_valid("12.5", Datatype::kInteger));
  CHECK(Literal::is_valid("-43.77", Datatype::kDecimal));
  CHECK(Literal::is_valid("2015-03-01T06:00:00Z", Datatype::kDateTime));
  CHECK_FALSE(Literal::is_valid("01/03/2015", Datatype::kDateTime));
  CHECK(Literal::is_valid("true", Datatype::kBoolean));
  CHECK_THROWS(Literal::make("abc", Datatype::kDecimal));
}

TEST_CASE("n-quads round trip") {
  std::vector<Quad> quads{
      make_quad("http://a/s", "http://a/p", Term::iri("http://a/o"), "http://a/c"),
      make_quad("http://a/s", "http://a/name", Term::literal("Via \"Roma\"\n\\ è"), "http://a/c"),
      make_quad("http://a/s", "http://a/n", Term::literal("42", Datatype::kInteger), "http://a/c"),
  };
  auto text = to_nquads(quads);
  CHECK(parse_nquads(text) == quads);
  CHECK(parse_nquads("# comment\n\n" + text) == quads);
}

TEST_CASE("n-quads parse errors") {
  CHECK_THROWS_AS(parse_nquads_line("<http://a/s> <http://a/p> <http://a/o> ."), Error);
  CHECK_THROWS_AS(parse_nquads_line("<http://a/s> <http://a/p> \"x <http://a/c> ."), Error);
  CHECK_THROWS_AS(parse_nquads_line("garbage"), Error);
}

TEST_CASE("datetime parsing and formatting") {
  auto a = parse_datetime("2015-03-01T06:00:00+01:00");
  auto b = parse_datetime("2015-03-01T05:00:00Z");
  CHECK(a == b);
  CHECK(a.offset_minutes == 60);
  CHECK(format_datetime(a) == "2015-03-01T06:00:00.000+01:00");
  CHECK(format_datetime(parse_datetime("2015-03-01")) == "2015-03-01T00:00:00.000Z");
  CHECK(compact_utc_stamp(a) == "20150301T050000000Z");
  CHECK_FALSE(try_parse_datetime("2015-02-30T00:00:00Z"));
  CHECK_FALSE(try_parse_datetime("yesterday"));
}

TEST_CASE("durations") {
  CHECK(parse_duration("PT12H") == parse_duration("12h"));
  CHECK(parse_duration("5min").fixed == std::chrono::minutes(5));
  CHECK(parse_duration("P2M").months == 2);
  CHECK(parse_duration("2mo").months == 2);
  CHECK(parse_duration("P1DT6H").fixed == std::chrono::hours(30));
  CHECK(format_duration(parse_duration("PT12H")) == "PT12H");
  CHECK_FALSE(try_parse_duration("12 parsecs"));
  auto jan31 = parse_datetime("2015-01-31T00:00:00Z").instant;
  CHECK(format_datetime(DateTime{add(jan31, parse_duration("P1M")), 0}).substr(0, 10) == "2015-02-28");
  CHECK(subtract(add(jan31, parse_duration("1d")), parse_duration("1d")) == jan31);
}

TEST_CASE("calendar keys match an independent ISO week computation") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<long> year(1990, 2040);
  std::uniform_int_distribution<unsigned> month(1, 12);
  std::uniform_int_distribution<unsigned> day(1, 28);
  for (int i = 0; i < 2000; ++i) {
    long y = year(rng);
    unsigned m = month(rng);
    unsigned d = day(rng);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04ld-%02u-%02uT12:00:00Z", y, m, d);
    auto t = parse_datetime(buf).instant;
    CHECK(iso_week_key(t, 0) == oracle::iso_week(y, m, d));
    CHECK(day_key(t, 0) == std::string(buf).substr(0, 10));
    CHECK(month_key(t, 0) == std::string(buf).substr(0, 7));
  }
  // Year boundaries.
  CHECK(iso_week_key(parse_datetime("2015-12-31T12:00:00Z").instant, 0) == "2015-W53");
  CHECK(iso_week_key(parse_datetime("2016-01-03T12:00:00Z").instant, 0) == "2015-W53");
  CHECK(iso_week_key(parse_datetime("2019-12-30T12:00:00Z").instant, 0) == "2020-W01");
  // Local offset shifts the day.
  auto late = parse_datetime("2015-02-28T23:30:00Z").instant;
  CHECK(day_key(late, 60) == "2015-03-01");
  CHECK(month_key(late, 60) == "2015-03");
}

}  // TEST_SUITE

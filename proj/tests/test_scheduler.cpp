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

#include <atomic>

#include "km4/common.hpp"
#include "km4/scheduler.hpp"
#include "support.hpp"

using namespace km4;
using namespace km4::sched;
using km4::test::TempDir;

namespace {

const DateTime kStart = parse_datetime("2015-03-01T10:00:00+01:00");

ingest::DatasetDescriptor feed(const std::string& id, const std::string& period) {
  ingest::DatasetDescriptor d;
  d.id = id;
  d.creation_date = kStart;
  d.source = "inbox/" + id;
  d.original_format = ingest::OriginalFormat::kFeed;
  d.process_type = ingest::ProcessType::kRealtime;
  d.update_period = parse_duration(period);
  d.macroclass = schema::MacroClass::kSensors;
  return d;
}

ingest::MappingSpec empty_mapping(const std::string& id) {
  ingest::MappingSpec m;
  m.dataset_id = id;
  return m;
}

struct Env {
  TempDir dir;
  store::QuadStore store;
  ingest::StagingStore staging;
  ingest::Pipeline pipeline{store, staging};
  std::atomic<int> calls{0};

  /// One parking payload per run, stamped with the run time.
  std::vector<std::filesystem::path> source(const std::string& id, const DateTime& now) {
    ++calls;
    if (id == "broken") return {dir.path() / "does-not-exist.json"};
    auto file = dir.path() / (id + "-" + compact_utc_stamp(now) + ".json");
    write_file(file.string(), R"({"type":"parking","carPark":")" + id + R"(","timestamp":")" +
                                  format_datetime(now) + R"(","free":10,"occupied":20})");
    return {file};
  }
};

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("a five-minute feed runs twelve times per hour") {
  Env env;
  env.pipeline.register_dataset(feed("parking", "5min"), empty_mapping("parking"));
  Scheduler s(env.pipeline, [&](const std::string& id, const DateTime& now) { return env.source(id, now); });
  s.add(ScheduleEntry{"parking", kStart, parse_duration("5min"), 1});
  auto reports = s.run_until(DateTime{kStart.instant + std::chrono::minutes(59), 60});
  CHECK(reports.size() == 12);
  for (const auto& r : reports) CHECK(r.ok);
  CHECK(env.staging.size("parking") == 12);
  CHECK(s.entries()[0].next_run == DateTime{kStart.instant + std::chrono::hours(1), 60});
  // Nothing due before the next slot.
  CHECK(s.run(DateTime{kStart.instant + std::chrono::minutes(59), 60}).empty());
}

TEST_CASE("one failing job does not stop the others") {
  Env env;
  env.pipeline.register_dataset(feed("parking", "PT10M"), empty_mapping("parking"));
  env.pipeline.register_dataset(feed("broken", "PT10M"), empty_mapping("broken"));
  Scheduler s(env.pipeline, [&](const std::string& id, const DateTime& now) { return env.source(id, now); });
  s.add(ScheduleEntry{"parking", kStart, parse_duration("PT10M"), 1});
  s.add(ScheduleEntry{"broken", kStart, parse_duration("PT10M"), 1});
  std::vector<JobReport> reports;
  CHECK_NOTHROW(reports = s.run_until(DateTime{kStart.instant + std::chrono::minutes(30), 60}));
  size_t ok = 0, failed = 0;
  for (const auto& r : reports) {
    if (r.ok) ++ok;
    else {
      ++failed;
      CHECK(r.dataset_id == "broken");
      CHECK_FALSE(r.error.empty());
    }
  }
  CHECK(ok == 4);
  CHECK(failed == 4);
  CHECK(env.pipeline.descriptor("broken").status == ingest::DatasetStatus::kFailed);
  CHECK(env.pipeline.descriptor("parking").status == ingest::DatasetStatus::kIndexed);
}

TEST_CASE("empty schedule and empty sources") {
  Env env;
  Scheduler none(env.pipeline, [&](const std::string& id, const DateTime& now) { return env.source(id, now); });
  CHECK(none.run_until(DateTime{kStart.instant + std::chrono::hours(24), 0}).empty());

  env.pipeline.register_dataset(feed("quiet", "PT1H"), empty_mapping("quiet"));
  Scheduler quiet(env.pipeline, [](const std::string&, const DateTime&) { return std::vector<std::filesystem::path>{}; });
  quiet.add(ScheduleEntry{"quiet", kStart, parse_duration("PT1H"), 1});
  auto r = quiet.run(kStart);
  REQUIRE(r.size() == 1);
  CHECK(r[0].ok);
  CHECK(r[0].files.empty());
}

TEST_CASE("entry validation and persistence") {
  Env env;
  env.pipeline.register_dataset(feed("parking", "5min"), empty_mapping("parking"));
  auto src = [&](const std::string& id, const DateTime& now) { return env.source(id, now); };
  Scheduler s(env.pipeline, src);
  CHECK_THROWS_AS(s.add(ScheduleEntry{"parking", kStart, Duration{}, 1}), Error);
  CHECK_THROWS_AS(s.add(ScheduleEntry{"parking", kStart, parse_duration("5min"), 0}), Error);
  try {
    s.add(ScheduleEntry{"ghost", kStart, parse_duration("5min"), 1});
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
  s.add(ScheduleEntry{"parking", kStart, parse_duration("P1M"), 2});
  Scheduler copy(env.pipeline, src);
  copy.load(s.serialize());
  CHECK(copy.serialize() == s.serialize());
  CHECK_THROWS_AS(copy.load("parking\tnot-a-date\tPT1H\t1\n"), Error);
}

TEST_CASE("monthly periods follow the calendar") {
  Env env;
  env.pipeline.register_dataset(feed("parking", "5min"), empty_mapping("parking"));
  Scheduler s(env.pipeline, [](const std::string&, const DateTime&) { return std::vector<std::filesystem::path>{}; });
  auto jan31 = parse_datetime("2015-01-31T00:00:00Z");
  s.add(ScheduleEntry{"parking", jan31, parse_duration("P1M"), 1});
  auto reports = s.run_until(parse_datetime("2015-05-01T00:00:00Z"));
  REQUIRE(reports.size() == 4);  // Jan 31, Feb 28, Mar 28, Apr 28
  CHECK(format_datetime(reports[1].run_at).substr(0, 10) == "2015-02-28");
}

}  // TEST_SUITE

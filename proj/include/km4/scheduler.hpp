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

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "km4/ingestion.hpp"
#include "km4/time.hpp"

namespace km4::sched {

struct ScheduleEntry {
  std::string dataset_id;
  DateTime next_run;
  Duration period;
  int max_concurrent = 1;
};

/// Files to process for one run of a dataset.
using SourceFn = std::function<std::vector<std::filesystem::path>(const std::string& dataset_id, const DateTime& now)>;

struct JobReport {
  std::string dataset_id;
  DateTime run_at;
  bool ok = true;
  bool deferred = false;  // dataset already at its concurrency limit
  std::string error;
  std::vector<ingest::IngestReport> files;
};

class Scheduler {
 public:
  Scheduler(ingest::Pipeline& pipeline, SourceFn source);

  /// Throws Error(kInvalidArgument) on a zero period or a limit below 1,
  /// and Error(kNotFound) when the dataset is not registered.
  void add(ScheduleEntry entry);
  std::vector<ScheduleEntry> entries() const;

  /// Runs every entry with next_run <= now once, concurrently across
  /// datasets, and advances each by its period. Job failures are reported,
  /// never thrown.
  std::vector<JobReport> run(const DateTime& now);

  /// Steps simulated time from due time to due time until `until`.
  std::vector<JobReport> run_until(const DateTime& until);

  /// `dataset<TAB>nextRun<TAB>period<TAB>maxConcurrent` per line.
  std::string serialize() const;
  void load(std::string_view text);

 private:
  JobReport run_job(const ScheduleEntry& entry, const DateTime& now);

  ingest::Pipeline& pipeline_;
  SourceFn source_;
  mutable std::mutex mutex_;
  std::map<std::string, ScheduleEntry> entries_;
  std::map<std::string, int> in_flight_;
};

}  // namespace km4::sched

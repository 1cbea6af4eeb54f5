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

#include "km4/scheduler.hpp"

#include <future>
#include <sstream>

#include "km4/common.hpp"

namespace km4::sched {

Scheduler::Scheduler(ingest::Pipeline& pipeline, SourceFn source)
    : pipeline_(pipeline), source_(std::move(source)) {}

void Scheduler::add(ScheduleEntry entry) {
  if (entry.period == Duration{}) {
    throw_error(ErrorCode::kInvalidArgument, "schedule period is zero for " + entry.dataset_id);
  }
  if (entry.max_concurrent < 1) {
    throw_error(ErrorCode::kInvalidArgument, "maxConcurrent must be at least 1 for " + entry.dataset_id);
  }
  if (!pipeline_.has_dataset(entry.dataset_id)) {
    throw_error(ErrorCode::kNotFound, "cannot schedule unknown dataset: " + entry.dataset_id);
  }
  std::lock_guard lock(mutex_);
  entries_[entry.dataset_id] = std::move(entry);
}

std::vector<ScheduleEntry> Scheduler::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<ScheduleEntry> out;
  for (const auto& [id, e] : entries_) out.push_back(e);
  return out;
}

JobReport Scheduler::run_job(const ScheduleEntry& entry, const DateTime& now) {
  JobReport r;
  r.dataset_id = entry.dataset_id;
  r.run_at = now;
  try {
    for (const auto& file : source_(entry.dataset_id, now)) {
      r.files.push_back(pipeline_.process_file(entry.dataset_id, file, now));
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

std::vector<JobReport> Scheduler::run(const DateTime& now) {
  std::vector<ScheduleEntry> due;
  std::vector<JobReport> deferred;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, e] : entries_) {
      if (e.next_run > now) continue;
      if (in_flight_[id] >= e.max_concurrent) {
        JobReport r;
        r.dataset_id = id;
        r.run_at = now;
        r.deferred = true;
        deferred.push_back(std::move(r));
        continue;
      }
      ++in_flight_[id];
      due.push_back(e);
      e.next_run.instant = km4::add(e.next_run.instant, e.period);
    }
  }
  std::vector<std::future<JobReport>> jobs;
  jobs.reserve(due.size());
  for (const auto& e : due) {
    jobs.push_back(std::async(std::launch::async, [this, e, now] { return run_job(e, now); }));
  }
  std::vector<JobReport> out;
  for (size_t i = 0; i < jobs.size(); ++i) {
    out.push_back(jobs[i].get());
    std::lock_guard lock(mutex_);
    --in_flight_[due[i].dataset_id];
  }
  out.insert(out.end(), deferred.begin(), deferred.end());
  return out;
}

std::vector<JobReport> Scheduler::run_until(const DateTime& until) {
  std::vector<JobReport> out;
  for (;;) {
    std::optional<DateTime> next;
    {
      std::lock_guard lock(mutex_);
      for (const auto& [id, e] : entries_) {
        if (e.next_run <= until && (!next || e.next_run < *next)) next = e.next_run;
      }
    }
    if (!next) break;
    auto batch = run(*next);
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

std::string Scheduler::serialize() const {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  for (const auto& [id, e] : entries_) {
    out << id << '\t' << format_datetime(e.next_run) << '\t' << format_duration(e.period) << '\t'
        << e.max_concurrent << '\n';
  }
  return out.str();
}

void Scheduler::load(std::string_view text) {
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    if (trim(raw).empty() || trim(raw)[0] == '#') continue;
    auto cols = split(trim(raw), '\t');
    if (cols.size() != 4) {
      throw_error(ErrorCode::kParse, "schedule line " + std::to_string(lineno) + ": expected 4 columns");
    }
    ScheduleEntry e;
    e.dataset_id = cols[0];
    e.next_run = parse_datetime(cols[1]);
    e.period = parse_duration(cols[2]);
    try {
      e.max_concurrent = std::stoi(cols[3]);
    } catch (const std::exception&) {
      throw_error(ErrorCode::kParse, "schedule line " + std::to_string(lineno) + ": bad maxConcurrent");
    }
    add(std::move(e));
  }
}

}  // namespace km4::sched

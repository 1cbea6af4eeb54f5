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

#include "km4/workspace.hpp"

#include <algorithm>
#include <json.hpp>

#include "km4/common.hpp"

namespace km4 {

namespace fs = std::filesystem;

DateTime now_utc() {
  return DateTime{std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now()), 0};
}

Workspace::Workspace(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  table_ = fs::exists(file("qualifiers.tsv")) ? address::QualifierTable::load(file("qualifiers.tsv").string())
                                              : address::QualifierTable::seed();
  store_ = std::make_unique<store::QuadStore>(file("store.log"));
  staging_ = std::make_unique<ingest::StagingStore>(file("staging.jsonl"));
  pipeline_ = std::make_unique<ingest::Pipeline>(*store_, *staging_, table_, file("registry"));
  if (fs::exists(file("istat.tsv"))) pipeline_->set_istat_table(ingest::IstatTable::load(file("istat.tsv").string()));
  scheduler_ = std::make_unique<sched::Scheduler>(
      *pipeline_, [this](const std::string& id, const DateTime&) { return source_files(id); });
  if (fs::exists(file("schedule.tsv"))) scheduler_->load(read_file(file("schedule.tsv").string()));
}

Workspace::~Workspace() = default;

void Workspace::schedule_registered() {
  std::set<std::string> scheduled;
  for (const auto& e : scheduler_->entries()) scheduled.insert(e.dataset_id);
  for (const auto& d : pipeline_->datasets()) {
    if (scheduled.count(d.id) || max_length(d.update_period).count() <= 0) continue;
    scheduler_->add(sched::ScheduleEntry{d.id, d.creation_date, d.update_period, 1});
  }
}

void Workspace::save_schedule() const { write_file(file("schedule.tsv").string(), scheduler_->serialize()); }

std::vector<fs::path> Workspace::source_files(const std::string& dataset_id) const {
  std::vector<fs::path> out;
  auto list_dir = [&](const fs::path& d) {
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file()) found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  };
  ingest::DatasetDescriptor d = pipeline_->descriptor(dataset_id);
  if (!d.source.empty() && d.source.find("://") == std::string::npos) {
    fs::path src(d.source);
    if (src.is_relative()) src = dir_ / src;
    if (fs::is_directory(src)) {
      list_dir(src);
    } else if (fs::is_regular_file(src)) {
      out.push_back(src);
    }
  }
  fs::path inbox = dir_ / "inbox" / dataset_id;
  if (fs::is_directory(inbox)) list_dir(inbox);
  return out;
}

ingest::IngestReport Workspace::post_feed(const std::string& dataset_id,
                                          const std::vector<realtime::Payload>& payloads, const DateTime& now) {
  if (payloads.empty()) throw_error(ErrorCode::kInvalidArgument, "no payloads to post");
  if (!pipeline_->has_dataset(dataset_id)) {
    ingest::DatasetDescriptor d;
    d.id = dataset_id;
    d.creation_date = now;
    d.source = "inbox/" + dataset_id;
    d.original_format = ingest::OriginalFormat::kFeed;
    d.description = "posted " + std::string(realtime::to_string(payloads.front().type)) + " payloads";
    d.license = "unspecified";
    d.process_type = ingest::ProcessType::kRealtime;
    d.access_type = "push";
    d.update_period = parse_duration("PT1H");
    d.macroclass = schema::MacroClass::kSensors;
    ingest::MappingSpec m;
    m.dataset_id = dataset_id;
    pipeline_->register_dataset(d, m);
  } else if (pipeline_->descriptor(dataset_id).original_format != ingest::OriginalFormat::kFeed) {
    throw_error(ErrorCode::kInvalidArgument, "dataset " + dataset_id + " is not a FEED dataset");
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : payloads) {
    nlohmann::json body = p.body;
    body["type"] = std::string(realtime::to_string(p.type));
    arr.push_back(std::move(body));
  }
  fs::path inbox = dir_ / "inbox" / dataset_id;
  fs::create_directories(inbox);
  fs::path target = inbox / (compact_utc_stamp(now) + ".json");
  for (int n = 1; fs::exists(target); ++n) {
    target = inbox / (compact_utc_stamp(now) + "-" + std::to_string(n) + ".json");
  }
  write_file(target.string(), arr.dump() + "\n");
  return pipeline_->process_file(dataset_id, target, now);
}

reconcile::ToponymCatalog Workspace::catalog() const {
  if (fs::exists(file("catalog.tsv"))) return reconcile::ToponymCatalog::load(file("catalog.tsv").string(), table_);
  return reconcile::ToponymCatalog::from_store(*store_, table_);
}

std::vector<reconcile::TargetService> Workspace::services() const {
  if (!fs::exists(file("services.tsv"))) return {};
  return reconcile::load_services(file("services.tsv").string());
}

std::optional<eval::GoldAlignment> Workspace::gold() const {
  if (!fs::exists(file("gold.tsv"))) return std::nullopt;
  return eval::GoldAlignment::load(file("gold.tsv").string());
}

}  // namespace km4

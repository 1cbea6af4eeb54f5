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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "km4/evaluator.hpp"
#include "km4/ingestion.hpp"
#include "km4/quadstore.hpp"
#include "km4/realtime.hpp"
#include "km4/reconciler.hpp"
#include "km4/scheduler.hpp"

namespace km4 {

/// Current wall-clock time, UTC, millisecond precision.
DateTime now_utc();

/// A directory holding everything one deployment persists:
///
///   store.log        quad store write-ahead log
///   staging.jsonl    staged records
///   registry/        dataset descriptors and mappings
///   schedule.tsv     scheduler entries
///   inbox/<id>/      posted feed payloads
///   qualifiers.tsv   optional extra qualifier variants
///   istat.tsv        optional municipality table
///   catalog.tsv, services.tsv, gold.tsv   reconciliation inputs
class Workspace {
 public:
  /// Creates the directory layout when missing and replays the store log.
  explicit Workspace(std::filesystem::path dir);
  ~Workspace();

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  store::QuadStore& store() { return *store_; }
  ingest::StagingStore& staging() { return *staging_; }
  ingest::Pipeline& pipeline() { return *pipeline_; }
  sched::Scheduler& scheduler() { return *scheduler_; }
  const address::QualifierTable& qualifiers() const { return table_; }

  /// Adds schedule entries for registered datasets with an update period
  /// that are not scheduled yet; the first run is due at creation date.
  void schedule_registered();
  void save_schedule() const;

  /// Files for one run: the descriptor's source when it is a file, the
  /// regular files inside it (sorted) when it is a directory, plus any
  /// posted payloads under inbox/<id>/. Relative sources resolve against
  /// the workspace directory.
  std::vector<std::filesystem::path> source_files(const std::string& dataset_id) const;

  /// Writes the payloads (each tagged with its type) under inbox/<id>/ and
  /// runs the pipeline on that file. The dataset is registered as a
  /// realtime FEED dataset when unknown.
  ingest::IngestReport post_feed(const std::string& dataset_id, const std::vector<realtime::Payload>& payloads,
                                 const DateTime& now);

  /// catalog.tsv when present, else the roads and numbers in the store.
  reconcile::ToponymCatalog catalog() const;
  std::vector<reconcile::TargetService> services() const;
  std::optional<eval::GoldAlignment> gold() const;

 private:
  std::filesystem::path dir_;
  address::QualifierTable table_;
  std::unique_ptr<store::QuadStore> store_;
  std::unique_ptr<ingest::StagingStore> staging_;
  std::unique_ptr<ingest::Pipeline> pipeline_;
  std::unique_ptr<sched::Scheduler> scheduler_;
};

}  // namespace km4

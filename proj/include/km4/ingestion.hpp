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
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "km4/address.hpp"
#include "km4/quad.hpp"
#include "km4/quadstore.hpp"
#include "km4/schema.hpp"
#include "km4/time.hpp"

namespace km4::ingest {

enum class OriginalFormat { kCsv, kXml, kPolyline, kFeed };
enum class ProcessType { kStatic, kSemiStatic, kRealtime };
enum class AutomationLevel { kAutomatic, kSemiAutomatic, kManual };
enum class DatasetStatus { kRegistered, kIngested, kImproved, kMapped, kIndexed, kFailed };

std::string_view to_string(OriginalFormat v);
std::string_view to_string(ProcessType v);
std::string_view to_string(AutomationLevel v);
std::string_view to_string(DatasetStatus v);
std::optional<OriginalFormat> original_format_from_string(std::string_view s);
std::optional<ProcessType> process_type_from_string(std::string_view s);
std::optional<AutomationLevel> automation_level_from_string(std::string_view s);
std::optional<DatasetStatus> dataset_status_from_string(std::string_view s);

/// Forward-only, except that any state may fail, a failed dataset may be
/// retried and an indexed dataset may begin its next ingestion cycle.
bool can_transition(DatasetStatus from, DatasetStatus to);

struct DatasetDescriptor {
  std::string id;
  DateTime creation_date;
  std::string source;
  OriginalFormat original_format = OriginalFormat::kCsv;
  std::string description;
  std::string license;
  ProcessType process_type = ProcessType::kStatic;
  AutomationLevel automation_level = AutomationLevel::kAutomatic;
  std::string access_type;
  Duration update_period;
  std::optional<DateTime> last_update;
  std::optional<DateTime> triple_creation_date;
  DatasetStatus status = DatasetStatus::kRegistered;
  schema::MacroClass macroclass = schema::MacroClass::kMetadata;

  /// Flat `key=value` text; keys are the field names in camelCase.
  static DatasetDescriptor parse(std::string_view text);
  std::string serialize() const;
  /// Throws Error(kInvalidArgument) on a broken invariant.
  void validate() const;

  bool operator==(const DatasetDescriptor& o) const { return serialize() == o.serialize(); }
};

struct ClassBinding {
  std::string role;
  std::string class_name;
  std::vector<std::string> key_columns;
};

/// `datatype` is a literal datatype name, or "iri" for object properties
/// whose column value names the target.
struct PropertyBinding {
  std::string role;
  std::string property;
  std::string column;
  std::string datatype;
};

struct LinkBinding {
  std::string from_role;
  std::string property;
  std::string to_role;
};

struct MappingSpec {
  std::string dataset_id;
  std::vector<ClassBinding> classes;
  std::vector<PropertyBinding> properties;
  std::vector<LinkBinding> links;

  /// Sections introduced by CLASS, PROP and LINK lines; rows tab-separated.
  static MappingSpec parse(std::string_view text);
  std::string serialize() const;
  /// Throws Error(kInvalidArgument) naming the first unknown role, class
  /// or property.
  void validate(const schema::Schema& schema) const;
  const ClassBinding* find_role(std::string_view role) const;
};

using FieldMap = std::vector<std::pair<std::string, std::string>>;

const std::string* find_field(const FieldMap& fields, std::string_view column);

struct Change {
  std::string column;
  std::string before;
  std::string after;
  std::string rule_id;

  friend bool operator==(const Change&, const Change&) = default;
};

struct StagedRecord {
  std::string dataset_id;
  std::string record_key;
  FieldMap raw_fields;
  FieldMap clean_fields;
  int version = 1;
  DateTime ingested_at;
  std::vector<Change> change_log;

  friend bool operator==(const StagedRecord&, const StagedRecord&) = default;
};

/// Ordered table keyed by (datasetId, recordKey, version), optionally
/// persisted as JSON lines. Raw fields are immutable once stored.
class StagingStore {
 public:
  StagingStore() = default;
  explicit StagingStore(const std::filesystem::path& file);

  /// Stores a new version unless the latest version has identical raw
  /// fields, in which case that version is returned unchanged.
  StagedRecord put(const std::string& dataset_id, const std::string& record_key, FieldMap raw,
                   const DateTime& ingested_at);
  /// Replaces clean fields and change log of an existing version.
  void update(const StagedRecord& record);

  std::optional<StagedRecord> latest(const std::string& dataset_id, const std::string& record_key) const;
  std::vector<StagedRecord> history(const std::string& dataset_id, const std::string& record_key) const;
  std::vector<StagedRecord> dataset(const std::string& dataset_id) const;
  size_t size() const;
  size_t size(const std::string& dataset_id) const;

 private:
  using Key = std::tuple<std::string, std::string, int>;
  void persist(const StagedRecord& r);

  mutable std::mutex mutex_;
  std::map<Key, StagedRecord> records_;
  std::ofstream log_;
};

/// Column rules derived from a mapping.
struct RuleSet {
  std::map<std::string, std::vector<std::string>> column_rules;

  static RuleSet from_mapping(const MappingSpec& mapping);
};

/// Pure: recomputes clean fields from raw fields.
StagedRecord quality_improve(const StagedRecord& record, const RuleSet& rules,
                             const address::QualifierTable& table);

/// A parsed source file: header plus rows of verbatim cell strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<FieldMap> rows;
};

/// Delimiter is detected from the header among , ; TAB |.
Table parse_csv(std::string_view text);
/// Children of the root element are records; their children are fields.
Table parse_xml(std::string_view text);
/// `ELEMENT <id>` blocks followed by `lon,lat` lines.
Table parse_polyline(std::string_view text);

std::string mint_iri(std::string_view dataset_id, std::string_view role,
                     const std::vector<std::string>& key_values);
std::string dataset_context_iri(std::string_view dataset_id);
std::string dataset_iri(std::string_view dataset_id);
std::string record_key(const FieldMap& fields, const MappingSpec& mapping, size_t row_number);

/// Skipped records add a diagnostic naming the record key.
std::vector<Quad> map_to_quads(const StagedRecord& record, const MappingSpec& mapping,
                               const schema::Schema& schema, std::vector<std::string>* diagnostics);

/// Junction per distinct point, RoadLink per segment.
std::vector<Quad> map_polyline(const std::vector<StagedRecord>& records, std::string_view dataset_id,
                               std::vector<std::string>* diagnostics);

/// Municipality name -> ISTAT code, with aliases.
class IstatTable {
 public:
  /// `name<TAB>code[<TAB>alias...]` per line.
  static IstatTable parse(std::string_view text);
  static IstatTable load(const std::string& path);
  void add(std::string_view name, std::string_view code, const std::vector<std::string>& aliases = {});
  std::optional<std::string> lookup(std::string_view name) const;
  /// Official name for a code.
  std::optional<std::string> name_of(std::string_view code) const;
  size_t size() const { return names_.size(); }

 private:
  std::map<std::string, std::string> by_name_;
  std::map<std::string, std::string> names_;
};

std::vector<Quad> descriptor_quads(const DatasetDescriptor& d);
/// Reads a descriptor back from the metadata context.
std::optional<DatasetDescriptor> descriptor_from_store(const store::QuadStore& store, std::string_view id);

struct IngestReport {
  std::string dataset_id;
  size_t rows = 0;
  size_t new_versions = 0;
  size_t quads_mapped = 0;
  size_t quads_inserted = 0;
  DatasetStatus status = DatasetStatus::kRegistered;
  std::vector<std::string> diagnostics;
};

/// Phases I-IV over one store: registration, staging, quality improvement,
/// mapping and indexing. Registry entries are kept in memory and, when a
/// directory is given, mirrored as `<id>.descriptor` / `<id>.mapping`.
class Pipeline {
 public:
  Pipeline(store::QuadStore& store, StagingStore& staging,
           address::QualifierTable table = address::QualifierTable::seed(),
           std::optional<std::filesystem::path> registry_dir = std::nullopt);

  /// Returns the minted data context.
  Iri register_dataset(DatasetDescriptor descriptor, MappingSpec mapping);

  /// Phase I only: parses and stages. A parse failure marks the dataset
  /// failed and rethrows with row/column diagnostics.
  std::vector<StagedRecord> ingest_file(const std::string& dataset_id, const std::filesystem::path& file,
                                        const DateTime& now);
  /// Whole chain on one file, ending with status indexed.
  IngestReport process_file(const std::string& dataset_id, const std::filesystem::path& file,
                            const DateTime& now);

  DatasetDescriptor descriptor(const std::string& dataset_id) const;
  MappingSpec mapping(const std::string& dataset_id) const;
  std::vector<DatasetDescriptor> datasets() const;
  bool has_dataset(const std::string& dataset_id) const;
  void set_status(const std::string& dataset_id, DatasetStatus status);
  /// Weather feeds get istatCode completed from this table when set.
  void set_istat_table(IstatTable table);

  store::QuadStore& store() { return store_; }
  StagingStore& staging() { return staging_; }
  const address::QualifierTable& qualifiers() const { return table_; }

 private:
  void save(const DatasetDescriptor& d, const MappingSpec* m);
  void set_status_locked(DatasetDescriptor& d, DatasetStatus status);

  store::QuadStore& store_;
  StagingStore& staging_;
  address::QualifierTable table_;
  std::optional<std::filesystem::path> registry_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, DatasetDescriptor> descriptors_;
  std::map<std::string, MappingSpec> mappings_;
  std::optional<IstatTable> istat_;
};

}  // namespace km4::ingest

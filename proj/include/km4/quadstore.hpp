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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "km4/disjoint_set.hpp"
#include "km4/geo.hpp"
#include "km4/quad.hpp"
#include "km4/schema.hpp"
#include "km4/time.hpp"

namespace km4::store {

enum class DataKind { kStatic, kRealtime, kReconciliation };

std::string_view to_string(DataKind k);
std::optional<DataKind> data_kind_from_string(std::string_view s);

/// Accounting label attached to a context (named graph).
struct ContextTag {
  schema::MacroClass macroclass = schema::MacroClass::kMetadata;
  DataKind kind = DataKind::kStatic;
  /// Local offset used for calendar bucketing during compaction.
  int utc_offset_minutes = 0;

  friend bool operator==(const ContextTag&, const ContextTag&) = default;
};

struct KindCounts {
  uint64_t static_count = 0;
  uint64_t realtime_count = 0;
  uint64_t reconciliation_count = 0;

  uint64_t row_total() const { return static_count + realtime_count + reconciliation_count; }
  uint64_t& at(DataKind k);
  uint64_t at(DataKind k) const;

  friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

/// Per-macroclass quad counts split by data kind, with an extra row for
/// quads whose context carries no tag.
class StoreStats {
 public:
  /// `macroclass` absent means the unclassified row.
  void add(std::optional<schema::MacroClass> macroclass, DataKind kind, uint64_t n);

  const KindCounts& row(schema::MacroClass m) const { return rows_[static_cast<size_t>(m)]; }
  const KindCounts& unclassified() const { return unclassified_; }
  const KindCounts& totals() const { return totals_; }

  bool has_unclassified() const { return unclassified_.row_total() > 0; }
  const std::vector<std::string>& untagged_contexts() const { return untagged_; }
  void note_untagged(std::string context) { untagged_.push_back(std::move(context)); }

  /// Column sums equal the totals row, and the grand total equals both the
  /// sum of row totals and the sum of column totals.
  bool consistent() const;

  /// TSV table: Macroclass, Static, RealTime, Reconciliation, Total.
  std::string to_tsv() const;

 private:
  std::array<KindCounts, 7> rows_{};
  KindCounts unclassified_;
  KindCounts totals_;
  std::vector<std::string> untagged_;
};

struct Pattern {
  std::optional<Iri> subject;
  std::optional<Iri> predicate;
  std::optional<Term> object;
  std::optional<Iri> context;
};

struct GeoHit {
  Iri entity;
  double distance_meters = 0;
};

/// Which numeric measures to summarize when real-time records are dropped.
struct AggregationSpec {
  std::vector<std::string> measure_properties;
  /// Offset for contexts without a tag.
  int default_utc_offset_minutes = 0;

  static AggregationSpec avm_delay();
};

struct CompactionReport {
  DateTime window_start;
  DateTime window_end;
  uint64_t dropped_quad_count = 0;
  uint64_t aggregate_quad_count = 0;
  uint64_t aggregate_entity_count = 0;
  /// Empty when nothing was dropped (no archive written).
  std::string archive_path;
};

/// Indexed quad store with sameAs closure, a geo index over entities that
/// carry WGS84 lat/long literals, and rolling-window compaction.
///
/// Readers take a shared lock and see a consistent snapshot; every mutation
/// goes through one exclusive writer path. When opened on a log file, each
/// committed batch is appended before the call returns, and the indexes are
/// rebuilt by replay on open.
class QuadStore {
 public:
  QuadStore();
  explicit QuadStore(const std::filesystem::path& log_path);
  ~QuadStore();

  QuadStore(const QuadStore&) = delete;
  QuadStore& operator=(const QuadStore&) = delete;

  /// Returns the number of newly stored quads; duplicates are ignored.
  /// Throws Error(kInvalidArgument) naming the offending quad if any
  /// component is empty; nothing is stored in that case.
  size_t insert(std::span<const Quad> quads);
  size_t insert(const Quad& q) { return insert(std::span<const Quad>(&q, 1)); }
  size_t remove(std::span<const Quad> quads);
  /// Deletes every quad of the context; returns the count removed.
  size_t remove_context(const Iri& context);

  size_t size() const;
  std::vector<Quad> match(const Pattern& pattern) const;
  size_t count(const Pattern& pattern) const;
  std::vector<Quad> match_with_closure(const Pattern& pattern) const;
  std::vector<Iri> contexts() const;

  /// Stores `<a> owl:sameAs <b>` in context `c`. Throws when a == b.
  Quad add_same_as(const Iri& a, const Iri& b, const Iri& c);
  /// Sorted members of the sameAs class of `x` (always includes x).
  std::vector<Iri> resolve(const Iri& x) const;

  /// At most k entities within max_distance, ascending by haversine
  /// distance, ties by IRI. `class_filter` is a class local name or IRI.
  std::vector<GeoHit> geo_near(geo::GeoPoint point, size_t k, double max_distance,
                               const std::optional<std::string>& class_filter = std::nullopt) const;
  std::optional<geo::GeoPoint> position(const Iri& entity) const;

  void tag_context(const Iri& context, ContextTag tag);
  std::optional<ContextTag> context_tag(const Iri& context) const;
  std::map<std::string, ContextTag> context_tags() const;

  StoreStats store_stats() const;

  /// Drops real-time records whose time instant is older than now - window,
  /// archives them verbatim as N-Quads and adds day/week/month aggregates.
  /// `archive` may name a directory (a generation file is created inside)
  /// or a file that must not exist yet. All-or-nothing.
  CompactionReport compact(const Duration& window, const DateTime& now,
                           const AggregationSpec& spec, const std::filesystem::path& archive);

  /// N-Quads export, sorted; optionally restricted to one context.
  std::string export_nquads(const std::optional<Iri>& context = std::nullopt) const;

 private:
  using Id = uint32_t;
  using Key = std::array<Id, 4>;

  Id intern(const Term& t);
  std::optional<Id> lookup(const Term& t) const;
  std::optional<Id> lookup_iri(std::string_view iri) const;
  const Term& term(Id id) const { return terms_[id]; }

  bool insert_ids(const Key& spoc);
  bool remove_ids(const Key& spoc);
  size_t insert_locked(std::span<const Quad> quads, bool log);
  size_t remove_locked(std::span<const Quad> quads, bool log);
  void match_ids(const std::array<std::optional<Id>, 4>& bound, std::vector<Key>& out) const;
  std::vector<Quad> decode_sorted(const std::vector<Key>& keys) const;
  void refresh_geo(Id subject);
  void rebuild_same_as();
  void append_log(char op, std::span<const Quad> quads);
  void append_tag_log(const Iri& context, const ContextTag& tag);
  void replay(const std::filesystem::path& log_path);

  mutable std::shared_mutex mutex_;
  std::vector<Term> terms_;
  std::unordered_map<Term, Id, TermHash> ids_;

  // Key component order per index: SPOC, POSC, OSPC, CSPO.
  std::set<Key> spoc_;
  std::set<Key> posc_;
  std::set<Key> ospc_;
  std::set<Key> cspo_;

  DisjointSet same_as_;
  geo::GridIndex geo_;
  std::map<std::string, ContextTag> tags_;

  Id rdf_type_ = 0;
  Id same_as_pred_ = 0;
  Id geo_lat_ = 0;
  Id geo_long_ = 0;

  std::ofstream log_;
};

}  // namespace km4::store

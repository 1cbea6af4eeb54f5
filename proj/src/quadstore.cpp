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

#include "km4/quadstore.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include "km4/common.hpp"
#include "km4/vocab.hpp"

namespace km4::store {

namespace {

using Order = std::array<int, 4>;

// Position i of an index key holds SPOC component order[i].
constexpr Order kSpoc = {0, 1, 2, 3};
constexpr Order kPosc = {1, 2, 0, 3};
constexpr Order kOspc = {2, 0, 1, 3};
constexpr Order kCspo = {3, 0, 1, 2};

template <typename K>
K permute(const K& spoc, const Order& order) {
  K out{};
  for (int i = 0; i < 4; ++i) out[i] = spoc[order[i]];
  return out;
}

template <typename K>
K unpermute(const K& key, const Order& order) {
  K out{};
  for (int i = 0; i < 4; ++i) out[order[i]] = key[i];
  return out;
}

std::optional<double> parse_number(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  std::string_view s = t.value();
  if (!s.empty() && s[0] == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(DataKind k) {
  switch (k) {
    case DataKind::kStatic: return "static";
    case DataKind::kRealtime: return "realtime";
    case DataKind::kReconciliation: return "reconciliation";
  }
  return "";
}

std::optional<DataKind> data_kind_from_string(std::string_view s) {
  for (auto k : {DataKind::kStatic, DataKind::kRealtime, DataKind::kReconciliation}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

uint64_t& KindCounts::at(DataKind k) {
  switch (k) {
    case DataKind::kStatic: return static_count;
    case DataKind::kRealtime: return realtime_count;
    case DataKind::kReconciliation: return reconciliation_count;
  }
  return static_count;
}

uint64_t KindCounts::at(DataKind k) const {
  return const_cast<KindCounts*>(this)->at(k);
}

void StoreStats::add(std::optional<schema::MacroClass> macroclass, DataKind kind, uint64_t n) {
  KindCounts& row = macroclass ? rows_[static_cast<size_t>(*macroclass)] : unclassified_;
  row.at(kind) += n;
  totals_.at(kind) += n;
}

bool StoreStats::consistent() const {
  KindCounts col;
  uint64_t row_sum = 0;
  auto fold = [&](const KindCounts& r) {
    col.static_count += r.static_count;
    col.realtime_count += r.realtime_count;
    col.reconciliation_count += r.reconciliation_count;
    row_sum += r.row_total();
  };
  for (const auto& r : rows_) fold(r);
  fold(unclassified_);
  return col == totals_ && row_sum == totals_.row_total();
}

std::string StoreStats::to_tsv() const {
  std::ostringstream out;
  out << "Macroclass\tStatic\tRealTime\tReconciliation\tTotal\n";
  auto line = [&](std::string_view name, const KindCounts& r) {
    out << name << '\t' << r.static_count << '\t' << r.realtime_count << '\t'
        << r.reconciliation_count << '\t' << r.row_total() << '\n';
  };
  for (auto m : schema::kAllMacroClasses) line(schema::to_string(m), row(m));
  if (has_unclassified()) line("unclassified", unclassified_);
  line("Total", totals_);
  return out.str();
}

AggregationSpec AggregationSpec::avm_delay() {
  AggregationSpec spec;
  spec.measure_properties.push_back(vocab::km4c("delay"));
  return spec;
}

QuadStore::QuadStore() {
  rdf_type_ = intern(Term(Iri(std::string(vocab::kRdfType))));
  same_as_pred_ = intern(Term(Iri(std::string(vocab::kOwlSameAs))));
  geo_lat_ = intern(Term(Iri(std::string(vocab::kGeoLat))));
  geo_long_ = intern(Term(Iri(std::string(vocab::kGeoLong))));
}

QuadStore::QuadStore(const std::filesystem::path& log_path) : QuadStore() {
  if (std::filesystem::exists(log_path)) replay(log_path);
  log_.open(log_path, std::ios::app | std::ios::binary);
  if (!log_) throw_error(ErrorCode::kIo, "cannot open store log: " + log_path.string());
}

QuadStore::~QuadStore() = default;

QuadStore::Id QuadStore::intern(const Term& t) {
  auto it = ids_.find(t);
  if (it != ids_.end()) return it->second;
  Id id = static_cast<Id>(terms_.size());
  terms_.push_back(t);
  ids_.emplace(t, id);
  return id;
}

std::optional<QuadStore::Id> QuadStore::lookup(const Term& t) const {
  auto it = ids_.find(t);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<QuadStore::Id> QuadStore::lookup_iri(std::string_view iri) const {
  if (!Iri::is_valid(iri)) return std::nullopt;
  return lookup(Term(Iri(std::string(iri))));
}

bool QuadStore::insert_ids(const Key& k) {
  if (!spoc_.insert(k).second) return false;
  posc_.insert(permute(k, kPosc));
  ospc_.insert(permute(k, kOspc));
  cspo_.insert(permute(k, kCspo));
  return true;
}

bool QuadStore::remove_ids(const Key& k) {
  if (spoc_.erase(k) == 0) return false;
  posc_.erase(permute(k, kPosc));
  ospc_.erase(permute(k, kOspc));
  cspo_.erase(permute(k, kCspo));
  return true;
}

size_t QuadStore::insert(std::span<const Quad> quads) {
  for (const auto& q : quads) {
    if (q.subject.empty() || q.predicate.empty() || q.context.empty() ||
        (q.object.is_iri() && !Iri::is_valid(q.object.value()))) {
      throw_error(ErrorCode::kInvalidArgument,
                  "malformed quad (empty or invalid component): " + to_nquads_line(q));
    }
  }
  std::unique_lock lock(mutex_);
  return insert_locked(quads, true);
}

size_t QuadStore::insert_locked(std::span<const Quad> quads, bool log) {
  size_t added = 0;
  std::vector<Quad> fresh;
  for (const auto& q : quads) {
    Key k = {intern(Term(q.subject)), intern(Term(q.predicate)), intern(q.object),
             intern(Term(q.context))};
    if (!insert_ids(k)) continue;
    ++added;
    if (log && log_.is_open()) fresh.push_back(q);
    if (k[1] == same_as_pred_ && q.object.is_iri() && k[0] != k[2]) same_as_.unite(k[0], k[2]);
    if (k[1] == geo_lat_ || k[1] == geo_long_) refresh_geo(k[0]);
  }
  if (!fresh.empty()) append_log('A', fresh);
  return added;
}

size_t QuadStore::remove(std::span<const Quad> quads) {
  std::unique_lock lock(mutex_);
  return remove_locked(quads, true);
}

size_t QuadStore::remove_locked(std::span<const Quad> quads, bool log) {
  size_t removed = 0;
  bool same_as_touched = false;
  std::vector<Quad> gone;
  for (const auto& q : quads) {
    auto s = lookup(Term(q.subject));
    auto p = lookup(Term(q.predicate));
    auto o = lookup(q.object);
    auto c = lookup(Term(q.context));
    if (!s || !p || !o || !c) continue;
    Key k = {*s, *p, *o, *c};
    if (!remove_ids(k)) continue;
    ++removed;
    if (log && log_.is_open()) gone.push_back(q);
    if (*p == same_as_pred_) same_as_touched = true;
    if (*p == geo_lat_ || *p == geo_long_) refresh_geo(*s);
  }
  if (same_as_touched) rebuild_same_as();
  if (!gone.empty()) append_log('D', gone);
  return removed;
}

size_t QuadStore::remove_context(const Iri& context) {
  std::unique_lock lock(mutex_);
  auto c = lookup(Term(context));
  if (!c) return 0;
  std::vector<Key> keys;
  match_ids({std::nullopt, std::nullopt, std::nullopt, *c}, keys);
  std::vector<Quad> quads;
  quads.reserve(keys.size());
  for (const auto& k : keys) {
    quads.push_back(Quad{term(k[0]).as_iri(), term(k[1]).as_iri(), term(k[2]), term(k[3]).as_iri()});
  }
  return remove_locked(quads, true);
}

void QuadStore::refresh_geo(Id subject) {
  auto first_number = [&](Id pred) -> std::optional<double> {
    auto it = spoc_.lower_bound(Key{subject, pred, 0, 0});
    for (; it != spoc_.end() && (*it)[0] == subject && (*it)[1] == pred; ++it) {
      if (auto v = parse_number(term((*it)[2]))) return v;
    }
    return std::nullopt;
  };
  auto lat = first_number(geo_lat_);
  auto lon = first_number(geo_long_);
  if (lat && lon && geo::GeoPoint::is_valid(*lat, *lon)) {
    geo_.upsert(subject, geo::GeoPoint{*lat, *lon});
  } else {
    geo_.erase(subject);
  }
}

void QuadStore::rebuild_same_as() {
  same_as_ = DisjointSet();
  auto it = posc_.lower_bound(Key{same_as_pred_, 0, 0, 0});
  for (; it != posc_.end() && (*it)[0] == same_as_pred_; ++it) {
    Id o = (*it)[1];
    Id s = (*it)[2];
    if (term(o).is_iri() && s != o) same_as_.unite(s, o);
  }
}

size_t QuadStore::size() const {
  std::shared_lock lock(mutex_);
  return spoc_.size();
}

void QuadStore::match_ids(const std::array<std::optional<Id>, 4>& bound, std::vector<Key>& out) const {
  // Pick the index whose leading components cover the most bound terms.
  struct Candidate {
    const std::set<Key>* index;
    Order order;
  };
  const Candidate candidates[] = {{&spoc_, kSpoc}, {&posc_, kPosc}, {&ospc_, kOspc}, {&cspo_, kCspo}};
  const Candidate* best = &candidates[0];
  int best_len = -1;
  for (const auto& cand : candidates) {
    int len = 0;
    while (len < 4 && bound[cand.order[len]]) ++len;
    if (len > best_len) {
      best_len = len;
      best = &cand;
    }
  }
  Key lo{};
  for (int i = 0; i < best_len; ++i) lo[i] = *bound[best->order[i]];
  for (auto it = best->index->lower_bound(lo); it != best->index->end(); ++it) {
    const Key& k = *it;
    bool in_prefix = true;
    for (int i = 0; i < best_len; ++i) {
      if (k[i] != lo[i]) {
        in_prefix = false;
        break;
      }
    }
    if (!in_prefix) break;
    Key spoc = unpermute(k, best->order);
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
      if (bound[i] && spoc[i] != *bound[i]) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(spoc);
  }
}

std::vector<Quad> QuadStore::decode_sorted(const std::vector<Key>& keys) const {
  std::vector<Quad> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    out.push_back(Quad{term(k[0]).as_iri(), term(k[1]).as_iri(), term(k[2]), term(k[3]).as_iri()});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Quad> QuadStore::match(const Pattern& pattern) const {
  std::shared_lock lock(mutex_);
  std::array<std::optional<Id>, 4> bound;
  auto bind = [&](int pos, const std::optional<Term>& t) {
    if (!t) return true;
    auto id = lookup(*t);
    if (!id) return false;
    bound[pos] = *id;
    return true;
  };
  auto as_term = [](const std::optional<Iri>& i) -> std::optional<Term> {
    if (!i) return std::nullopt;
    return Term(*i);
  };
  if (!bind(0, as_term(pattern.subject)) || !bind(1, as_term(pattern.predicate)) ||
      !bind(2, pattern.object) || !bind(3, as_term(pattern.context))) {
    return {};
  }
  std::vector<Key> keys;
  match_ids(bound, keys);
  return decode_sorted(keys);
}

size_t QuadStore::count(const Pattern& pattern) const {
  return match(pattern).size();
}

std::vector<Quad> QuadStore::match_with_closure(const Pattern& pattern) const {
  std::shared_lock lock(mutex_);
  std::optional<Id> p;
  std::optional<Id> c;
  if (pattern.predicate) {
    p = lookup(Term(*pattern.predicate));
    if (!p) return {};
  }
  if (pattern.context) {
    c = lookup(Term(*pattern.context));
    if (!c) return {};
  }
  // Candidate ids for an entity position; unbound means a single wildcard.
  auto expand = [&](const std::optional<Term>& t) -> std::optional<std::vector<Id>> {
    if (!t) return std::vector<Id>{};
    auto id = lookup(*t);
    if (!id) {
      return std::nullopt;
    }
    if (!t->is_iri()) return std::vector<Id>{*id};
    return same_as_.members(*id);
  };
  std::optional<Term> st;
  if (pattern.subject) st = Term(*pattern.subject);
  auto subjects = expand(st);
  auto objects = expand(pattern.object);
  // An unknown entity may still be in a class only through stored links,
  // which would have interned it; so unknown means no matches.
  if (!subjects || !objects) return {};
  std::vector<std::optional<Id>> ss;
  std::vector<std::optional<Id>> os;
  if (subjects->empty()) ss.push_back(std::nullopt);
  for (Id s : *subjects) ss.push_back(s);
  if (objects->empty()) os.push_back(std::nullopt);
  for (Id o : *objects) os.push_back(o);

  std::vector<Key> keys;
  for (const auto& s : ss) {
    for (const auto& o : os) match_ids({s, p, o, c}, keys);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return decode_sorted(keys);
}

std::vector<Iri> QuadStore::contexts() const {
  std::shared_lock lock(mutex_);
  std::vector<Iri> out;
  std::optional<Id> last;
  for (const auto& k : cspo_) {
    if (last && *last == k[0]) continue;
    last = k[0];
    out.push_back(term(k[0]).as_iri());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Quad QuadStore::add_same_as(const Iri& a, const Iri& b, const Iri& c) {
  if (a == b) throw_error(ErrorCode::kInvalidArgument, "sameAs requires distinct IRIs: " + a.str());
  Quad q{a, Iri(std::string(vocab::kOwlSameAs)), Term(b), c};
  insert(q);
  return q;
}

std::vector<Iri> QuadStore::resolve(const Iri& x) const {
  std::shared_lock lock(mutex_);
  auto id = lookup(Term(x));
  if (!id) return {x};
  std::vector<Iri> out;
  for (Id m : same_as_.members(*id)) out.push_back(term(m).as_iri());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GeoHit> QuadStore::geo_near(geo::GeoPoint point, size_t k, double max_distance,
                                        const std::optional<std::string>& class_filter) const {
  if (k == 0) throw_error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (!geo::GeoPoint::is_valid(point.lat, point.lon)) {
    throw_error(ErrorCode::kInvalidArgument, "query point out of range");
  }
  std::shared_lock lock(mutex_);
  const schema::Schema& sch = schema::load_schema();

  std::string filter_name;
  if (class_filter) {
    filter_name = std::string(starts_with(*class_filter, vocab::kKm4c) ? vocab::local_name(*class_filter)
                                                                        : std::string_view(*class_filter));
  }
  auto passes = [&](Id entity) {
    if (!class_filter) return true;
    auto it = spoc_.lower_bound(Key{entity, rdf_type_, 0, 0});
    for (; it != spoc_.end() && (*it)[0] == entity && (*it)[1] == rdf_type_; ++it) {
      const std::string& cls = term((*it)[2]).value();
      if (cls == *class_filter) return true;
      if (starts_with(cls, vocab::kKm4c)) {
        std::string local(vocab::local_name(cls));
        if (local == filter_name) return true;
        if (sch.find_class(local) && sch.find_class(filter_name) && sch.is_subclass_of(local, filter_name)) {
          return true;
        }
      }
    }
    return false;
  };

  std::vector<GeoHit> hits;
  size_t want = k;
  while (true) {
    auto near = geo_.nearest(point, want, max_distance);
    hits.clear();
    for (const auto& n : near) {
      if (passes(n.id)) hits.push_back(GeoHit{term(n.id).as_iri(), n.distance});
    }
    if (hits.size() >= k || near.size() < want || want >= geo_.size()) break;
    want = std::min(geo_.size(), want * 4);
  }
  std::sort(hits.begin(), hits.end(), [](const GeoHit& a, const GeoHit& b) {
    return a.distance_meters < b.distance_meters ||
           (a.distance_meters == b.distance_meters && a.entity < b.entity);
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::optional<geo::GeoPoint> QuadStore::position(const Iri& entity) const {
  std::shared_lock lock(mutex_);
  auto id = lookup(Term(entity));
  if (!id) return std::nullopt;
  return geo_.position(*id);
}

void QuadStore::tag_context(const Iri& context, ContextTag tag) {
  std::unique_lock lock(mutex_);
  auto it = tags_.find(context.str());
  if (it != tags_.end() && it->second == tag) return;
  tags_[context.str()] = tag;
  append_tag_log(context, tag);
}

std::optional<ContextTag> QuadStore::context_tag(const Iri& context) const {
  std::shared_lock lock(mutex_);
  auto it = tags_.find(context.str());
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, ContextTag> QuadStore::context_tags() const {
  std::shared_lock lock(mutex_);
  return tags_;
}

StoreStats QuadStore::store_stats() const {
  std::shared_lock lock(mutex_);
  StoreStats stats;
  auto it = cspo_.begin();
  while (it != cspo_.end()) {
    Id c = (*it)[0];
    uint64_t n = 0;
    while (it != cspo_.end() && (*it)[0] == c) {
      ++n;
      ++it;
    }
    const std::string& name = term(c).value();
    auto tag = tags_.find(name);
    if (tag == tags_.end()) {
      stats.add(std::nullopt, DataKind::kStatic, n);
      stats.note_untagged(name);
    } else {
      stats.add(tag->second.macroclass, tag->second.kind, n);
    }
  }
  return stats;
}

CompactionReport QuadStore::compact(const Duration& window, const DateTime& now,
                                    const AggregationSpec& spec, const std::filesystem::path& archive) {
  std::unique_lock lock(mutex_);
  CompactionReport report;
  report.window_end = now;
  report.window_start = DateTime{subtract(now.instant, window), now.offset_minutes};
  const TimePoint cutoff = report.window_start.instant;

  std::unordered_map<Id, int> realtime;  // context id -> utc offset
  for (const auto& [name, tag] : tags_) {
    if (tag.kind != DataKind::kRealtime) continue;
    if (auto id = lookup_iri(name)) realtime.emplace(*id, tag.utc_offset_minutes);
  }
  if (realtime.empty()) return report;

  // Instants and their times.
  std::unordered_map<Id, TimePoint> instant_time;
  if (auto in_xsd = lookup_iri(vocab::kTimeInXsdDateTime)) {
    for (auto it = posc_.lower_bound(Key{*in_xsd, 0, 0, 0}); it != posc_.end() && (*it)[0] == *in_xsd; ++it) {
      if (!realtime.count((*it)[3])) continue;
      const Term& lit = term((*it)[1]);
      if (!lit.is_literal()) continue;
      if (auto dt = try_parse_datetime(lit.value())) instant_time[(*it)[2]] = dt->instant;
    }
  }

  // Record time: latest instant a non-instant subject links to.
  std::unordered_map<Id, TimePoint> entity_time;
  std::unordered_map<Id, Id> entity_context;
  std::unordered_set<Id> subjects;
  for (const auto& [c, offset] : realtime) {
    (void)offset;
    for (auto it = cspo_.lower_bound(Key{c, 0, 0, 0}); it != cspo_.end() && (*it)[0] == c; ++it) {
      Id s = (*it)[1];
      Id o = (*it)[3];
      subjects.insert(s);
      if (instant_time.count(s)) continue;
      auto ti = instant_time.find(o);
      if (ti == instant_time.end()) continue;
      auto [et, fresh] = entity_time.emplace(s, ti->second);
      if (!fresh && ti->second > et->second) et->second = ti->second;
      entity_context.emplace(s, c);
    }
  }

  // Referrers of x inside realtime contexts.
  auto referrers = [&](Id x) {
    std::vector<Id> out;
    for (auto it = ospc_.lower_bound(Key{x, 0, 0, 0}); it != ospc_.end() && (*it)[0] == x; ++it) {
      if (realtime.count((*it)[3])) out.push_back((*it)[1]);
    }
    return out;
  };

  std::unordered_set<Id> old;
  for (const auto& [e, t] : entity_time) {
    if (t < cutoff) old.insert(e);
  }
  for (const auto& [i, t] : instant_time) {
    auto refs = referrers(i);
    bool all_old = !refs.empty() &&
                   std::all_of(refs.begin(), refs.end(), [&](Id r) { return old.count(r) > 0; });
    if (all_old || (refs.empty() && t < cutoff)) old.insert(i);
  }
  // Untimed dependents referenced only by dropped records go with them.
  bool changed = true;
  while (changed) {
    changed = false;
    for (Id s : subjects) {
      if (old.count(s) || entity_time.count(s) || instant_time.count(s)) continue;
      auto refs = referrers(s);
      if (refs.empty()) continue;
      if (std::all_of(refs.begin(), refs.end(), [&](Id r) { return old.count(r) > 0; })) {
        old.insert(s);
        changed = true;
      }
    }
  }
  if (old.empty()) return report;

  std::vector<Key> dropped;
  for (const auto& [c, offset] : realtime) {
    (void)offset;
    for (auto it = cspo_.lower_bound(Key{c, 0, 0, 0}); it != cspo_.end() && (*it)[0] == c; ++it) {
      if (old.count((*it)[1]) || old.count((*it)[3])) dropped.push_back(unpermute(*it, kCspo));
    }
  }
  if (dropped.empty()) return report;
  std::vector<Quad> dropped_quads = decode_sorted(dropped);

  // Aggregates over the dropped records' measures.
  struct Acc {
    uint64_t count = 0;
    double sum = 0;
    double min = 0;
    double max = 0;
  };
  // (context, measure, period, key) -> accumulator
  std::map<std::tuple<std::string, std::string, std::string, std::string>, Acc> acc;
  std::vector<Id> old_records;
  for (const auto& [e, t] : entity_time) {
    if (old.count(e)) old_records.push_back(e);
  }
  std::sort(old_records.begin(), old_records.end());
  for (const auto& measure : spec.measure_properties) {
    auto m = lookup_iri(measure);
    if (!m) continue;
    for (Id e : old_records) {
      TimePoint t = entity_time.at(e);
      for (auto it = spoc_.lower_bound(Key{e, *m, 0, 0}); it != spoc_.end() && (*it)[0] == e && (*it)[1] == *m;
           ++it) {
        Id c = (*it)[3];
        auto rc = realtime.find(c);
        if (rc == realtime.end()) continue;
        auto v = parse_number(term((*it)[2]));
        if (!v) continue;
        int offset = rc->second;
        const std::string& ctx = term(c).value();
        const std::pair<std::string, std::string> periods[] = {
            {"day", day_key(t, offset)}, {"week", iso_week_key(t, offset)}, {"month", month_key(t, offset)}};
        for (const auto& [period, key] : periods) {
          Acc& a = acc[{ctx, measure, period, key}];
          if (a.count == 0) {
            a.min = *v;
            a.max = *v;
          } else {
            a.min = std::min(a.min, *v);
            a.max = std::max(a.max, *v);
          }
          ++a.count;
          a.sum += *v;
        }
      }
    }
  }

  // Write the archive before touching the live store.
  std::filesystem::path target = archive;
  std::error_code ec;
  if (std::filesystem::is_directory(archive, ec)) {
    target = archive / ("archive-" + compact_utc_stamp(now) + ".nq");
  }
  if (std::filesystem::exists(target, ec)) {
    throw_error(ErrorCode::kConflict, "archive file already exists: " + target.string());
  }
  {
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(ErrorCode::kIo, "cannot write archive: " + target.string());
    std::string text = to_nquads(dropped_quads);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(target, ec);
      throw_error(ErrorCode::kIo, "cannot write archive: " + target.string());
    }
  }

  remove_locked(dropped_quads, true);

  const Iri type_iri(std::string(vocab::kRdfType));
  const Iri stat_class(vocab::km4c("StatisticalData"));
  const Iri p_period(vocab::km4c("aggregatePeriod"));
  const Iri p_key(vocab::km4c("periodKey"));
  const Iri p_measure(vocab::km4c("aggregatedProperty"));
  const Iri p_count(vocab::km4c("count"));
  const Iri p_sum(vocab::km4c("sum"));
  const Iri p_mean(vocab::km4c("mean"));
  const Iri p_min(vocab::km4c("min"));
  const Iri p_max(vocab::km4c("max"));

  std::vector<Quad> stale;
  std::vector<Quad> fresh;
  for (auto& [k, a] : acc) {
    const auto& [ctx, measure, period, key] = k;
    Iri agg(ctx + "/aggregate/" + percent_encode(vocab::local_name(measure)) + "/" + period + "/" + key);
    Iri context(ctx);
    // Merge with an aggregate from an earlier compaction.
    if (auto id = lookup(Term(agg))) {
      auto read = [&](const Iri& p) -> std::optional<double> {
        auto pid = lookup(Term(p));
        if (!pid) return std::nullopt;
        auto it = spoc_.lower_bound(Key{*id, *pid, 0, 0});
        if (it == spoc_.end() || (*it)[0] != *id || (*it)[1] != *pid) return std::nullopt;
        return parse_number(term((*it)[2]));
      };
      auto c0 = read(p_count);
      auto s0 = read(p_sum);
      auto lo = read(p_min);
      auto hi = read(p_max);
      if (c0 && s0 && lo && hi) {
        a.count += static_cast<uint64_t>(*c0);
        a.sum += *s0;
        a.min = std::min(a.min, *lo);
        a.max = std::max(a.max, *hi);
      }
      for (const Iri* p : {&p_count, &p_sum, &p_mean, &p_min, &p_max}) {
        auto pid = lookup(Term(*p));
        if (!pid) continue;
        for (auto it = spoc_.lower_bound(Key{*id, *pid, 0, 0});
             it != spoc_.end() && (*it)[0] == *id && (*it)[1] == *pid; ++it) {
          stale.push_back(Quad{agg, *p, term((*it)[2]), term((*it)[3]).as_iri()});
        }
      }
    }
    double mean = a.sum / static_cast<double>(a.count);
    fresh.push_back(Quad{agg, type_iri, Term(stat_class), context});
    fresh.push_back(Quad{agg, p_period, Term::literal(period), context});
    fresh.push_back(Quad{agg, p_key, Term::literal(key), context});
    fresh.push_back(Quad{agg, p_measure, Term(Iri(measure)), context});
    fresh.push_back(Quad{agg, p_count, Term::literal(std::to_string(a.count), Datatype::kInteger), context});
    fresh.push_back(Quad{agg, p_sum, Term::literal(format_double(a.sum), Datatype::kDecimal), context});
    fresh.push_back(Quad{agg, p_mean, Term::literal(format_double(mean), Datatype::kDecimal), context});
    fresh.push_back(Quad{agg, p_min, Term::literal(format_double(a.min), Datatype::kDecimal), context});
    fresh.push_back(Quad{agg, p_max, Term::literal(format_double(a.max), Datatype::kDecimal), context});
  }
  remove_locked(stale, true);
  report.aggregate_quad_count = insert_locked(fresh, true);
  report.aggregate_entity_count = acc.size();
  report.dropped_quad_count = dropped_quads.size();
  report.archive_path = target.string();
  return report;
}

std::string QuadStore::export_nquads(const std::optional<Iri>& context) const {
  Pattern p;
  p.context = context;
  return to_nquads(match(p));
}

void QuadStore::append_log(char op, std::span<const Quad> quads) {
  if (!log_.is_open()) return;
  std::string buf;
  for (const auto& q : quads) {
    buf += op;
    buf += ' ';
    buf += to_nquads_line(q);
    buf += '\n';
  }
  log_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  log_.flush();
  if (!log_) throw_error(ErrorCode::kIo, "store log write failed");
}

void QuadStore::append_tag_log(const Iri& context, const ContextTag& tag) {
  if (!log_.is_open()) return;
  log_ << "T <" << context.str() << "> " << schema::to_string(tag.macroclass) << ' ' << to_string(tag.kind) << ' '
       << tag.utc_offset_minutes << '\n';
  log_.flush();
  if (!log_) throw_error(ErrorCode::kIo, "store log write failed");
}

void QuadStore::replay(const std::filesystem::path& log_path) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw_error(ErrorCode::kIo, "cannot read store log: " + log_path.string());
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    // A torn final line from a crash is ignored; anything else is corruption.
    auto fail = [&](const std::string& why) {
      if (in.peek() == std::char_traits<char>::eof()) return;
      throw_error(ErrorCode::kParse, log_path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (line.size() < 3 || line[1] != ' ') {
      fail("malformed log record");
      continue;
    }
    std::string_view body = std::string_view(line).substr(2);
    try {
      if (line[0] == 'A' || line[0] == 'D') {
        Quad q = parse_nquads_line(body);
        if (line[0] == 'A') {
          insert_locked(std::span<const Quad>(&q, 1), false);
        } else {
          remove_locked(std::span<const Quad>(&q, 1), false);
        }
      } else if (line[0] == 'T') {
        auto parts = split_whitespace(body);
        if (parts.size() != 4 || parts[0].size() < 2) {
          fail("malformed tag record");
          continue;
        }
        auto m = schema::macroclass_from_string(parts[1]);
        auto k = data_kind_from_string(parts[2]);
        if (!m || !k) {
          fail("unknown tag value");
          continue;
        }
        tags_[parts[0].substr(1, parts[0].size() - 2)] = ContextTag{*m, *k, std::stoi(parts[3])};
      } else {
        fail("unknown log record type");
      }
    } catch (const Error& e) {
      fail(e.what());
    }
  }
}

}  // namespace km4::store

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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here. The exit status counts failures, except those listed as known
// unattainable (reported as FAIL all the same).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "avm_history.hpp"
#include "fuzz.hpp"
#include "km4/common.hpp"
#include "km4/corpus.hpp"
#include "km4/evaluator.hpp"
#include "km4/ingestion.hpp"
#include "km4/quadstore.hpp"
#include "km4/scheduler.hpp"
#include "km4/schema.hpp"
#include "km4/similarity.hpp"
#include "km4/vocab.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace km4;
namespace fs = std::filesystem;

namespace {

constexpr double kF1Tolerance = 0.0005;
constexpr double kOrderingSeconds = 60.0;
constexpr double kManualMinPrecision = 0.95;
constexpr double kGrowthTolerance = 0.02;
constexpr double kGeoDistanceTolerance = 1e-6;  // meters, between two haversine codings

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_unattainable = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome f1_fidelity() {
  struct Row {
    const char* name;
    double p, r, printed;
  };
  const Row rows[] = {{"manual", 0.985, 0.722, 0.833},
                      {"levenshtein", 0.927, 0.508, 0.656},
                      {"dice", 0.968, 0.674, 0.794},
                      {"jaccard", 1.000, 0.472, 0.642},
                      {"kb", 0.925, 0.714, 0.806}};
  Outcome o{true, "", false};
  std::vector<std::string> off;
  for (const auto& r : rows) {
    double f = eval::f1_score(r.p, r.r);
    bool ok = std::abs(f - r.printed) <= kF1Tolerance;
    o.detail += std::string(r.name) + "=" + fmt("%.6f", f) + (ok ? " " : "(!) ");
    if (!ok) {
      o.pass = false;
      off.push_back(r.name);
    }
  }
  // 2PR/(P+R) of the printed P and R misses the printed F1 of these two rows
  // by 0.00068 and 0.00070; no formula change is made to hide it.
  if (!o.pass && off == std::vector<std::string>{"dice", "jaccard"}) {
    o.known_unattainable = true;
    o.detail += "| printed P/R inconsistent with printed F1 for dice, jaccard";
  }
  return o;
}

Outcome table_orderings() {
  auto t0 = std::chrono::steady_clock::now();
  auto spec = eval::CorpusSpec::defaults();
  auto corpus = eval::generate_corpus(spec);
  auto rows = eval::compare_methods(corpus.services, corpus.catalog, corpus.gold, eval::all_methods());
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::map<std::string, const eval::MetricsReport*> by;
  const std::vector<std::string> names = eval::all_methods();
  for (size_t i = 0; i < rows.size(); ++i) by[names[i]] = &rows[i].metrics;
  const auto& exact = *by["exact"];
  const auto& lev = *by["levenshtein"];
  const auto& dice = *by["dice"];
  const auto& jac = *by["jaccard"];
  const auto& kb = *by["kbLevenshtein"];
  const auto& manual = *by["manual"];

  std::vector<std::pair<std::string, bool>> checks{
      {"exact P=1", exact.precision == 1.0},
      {"jaccard P max", jac.precision >= lev.precision && jac.precision >= dice.precision &&
                            jac.precision >= kb.precision},
      {"dice F1 > lev F1", dice.f1 > lev.f1},
      {"kb R > lev R", kb.recall > lev.recall},
      {"manual R > exact R", manual.recall > exact.recall},
      {"manual P >= 0.95", manual.precision >= kManualMinPrecision},
      {"runtime < 60s", secs < kOrderingSeconds},
  };
  Outcome o{true, "", false};
  for (const auto& [name, ok] : checks) {
    if (!ok) {
      o.pass = false;
      o.detail += "failed: " + name + "; ";
    }
  }
  std::ostringstream d;
  d.precision(3);
  d << std::fixed << "services=" << corpus.services.size() << " exact P=" << exact.precision
    << " R=" << exact.recall << " lev F1=" << lev.f1 << " R=" << lev.recall << " dice F1=" << dice.f1
    << " jaccard P=" << jac.precision << " kb R=" << kb.recall << " manual P=" << manual.precision
    << " R=" << manual.recall << " " << fmt("%.1fs", secs);
  o.detail += d.str();
  return o;
}

Outcome schema_suite() {
  const auto& s = schema::load_schema();
  const std::string ctx = "http://example.org/acc";
  auto q = [&](const std::string& subj, const std::string& prop, Term o) {
    return make_quad(subj, s.property_iri(prop), std::move(o), ctx);
  };
  auto dec = [](const char* v) { return Term::literal(v, Datatype::kDecimal); };
  auto ref = [](const std::string& v) { return Term::iri("http://example.org/" + v); };
  auto errors = [](const std::vector<schema::ViolationReport>& v, const std::string& prop) {
    size_t any = 0, on_prop = 0;
    for (const auto& r : v) {
      if (r.severity != schema::Severity::kError) continue;
      ++any;
      if (r.constraint.property == prop) ++on_prop;
    }
    return std::make_pair(any, on_prop);
  };
  struct Case {
    std::string name, cls, prop;
    std::vector<Quad> good, bad;
  };
  const std::string e = "http://example.org/e";
  std::vector<Case> cases{
      {"Node coordinates", "Node", "long", {q(e, "lat", dec("43.7")), q(e, "long", dec("11.2"))},
       {q(e, "lat", dec("43.7"))}},
      {"Road elements", "Road", "containsElement", {q(e, "containsElement", ref("re/1"))},
       {q(e, "inMunicipalityOf", ref("m/1"))}},
      {"Milestone element", "Milestone", "isInElement", {q(e, "isInElement", ref("ar/1"))},
       {q(e, "isInElement", ref("ar/1")), q(e, "isInElement", ref("ar/2"))}},
      {"Ride line", "Ride", "scheduledOnLine", {q(e, "scheduledOnLine", ref("line/4"))},
       {q(e, "scheduledOnLine", ref("line/4")), q(e, "scheduledOnLine", ref("line/6"))}},
      {"BusStop coordinates", "BusStop", "lat", {q(e, "lat", dec("43.7")), q(e, "long", dec("11.2"))},
       {q(e, "long", dec("11.2"))}},
      {"Service hasAccess", "Service", "hasAccess", {q(e, "hasAccess", ref("entry/1"))},
       {q(e, "hasAccess", ref("entry/1")), q(e, "hasAccess", ref("entry/2"))}},
  };
  Outcome o{true, "", false};
  size_t passed = 0;
  for (const auto& c : cases) {
    auto good = errors(schema::validate_entity(s, c.good, c.cls, e), c.prop);
    auto bad = errors(schema::validate_entity(s, c.bad, c.cls, e), c.prop);
    bool ok = good.first == 0 && bad.second > 0;
    if (ok) {
      ++passed;
    } else {
      o.pass = false;
      o.detail += c.name + " failed; ";
    }
  }
  o.detail += std::to_string(passed) + "/" + std::to_string(cases.size()) + " constraints with positive and negative fixtures";
  return o;
}

Outcome oracle_equivalences() {
  std::mt19937_64 rng(2026);
  Outcome o{true, "", false};

  // Geo: 10,000 points, 200 queries.
  {
    store::QuadStore st;
    std::uniform_real_distribution<double> lat(43.60, 43.95), lon(10.95, 11.45);
    std::vector<std::pair<std::string, geo::GeoPoint>> pts;
    std::vector<Quad> quads;
    for (int i = 0; i < 10000; ++i) {
      std::string iri = "http://example.org/pt/" + std::to_string(i);
      geo::GeoPoint p{lat(rng), lon(rng)};
      auto slat = format_double(p.lat), slon = format_double(p.lon);
      p = {std::stod(slat), std::stod(slon)};
      pts.emplace_back(iri, p);
      quads.push_back(make_quad(iri, vocab::kGeoLat, Term::literal(slat, Datatype::kDecimal), "http://example.org/g"));
      quads.push_back(make_quad(iri, vocab::kGeoLong, Term::literal(slon, Datatype::kDecimal), "http://example.org/g"));
    }
    st.insert(quads);
    std::uniform_int_distribution<int> kd(1, 25);
    std::uniform_real_distribution<double> maxd(200, 8000);
    size_t mismatches = 0;
    for (int qi = 0; qi < 200; ++qi) {
      geo::GeoPoint c{lat(rng), lon(rng)};
      size_t k = static_cast<size_t>(kd(rng));
      double md = qi % 2 ? maxd(rng) : std::numeric_limits<double>::infinity();
      std::vector<std::pair<double, std::string>> brute;
      for (const auto& [iri, p] : pts) {
        double d = oracle::haversine(c.lat, c.lon, p.lat, p.lon);
        if (d <= md) brute.emplace_back(d, iri);
      }
      std::sort(brute.begin(), brute.end());
      if (brute.size() > k) brute.resize(k);
      auto got = st.geo_near(c, k, md);
      bool same = got.size() == brute.size();
      for (size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].entity.str() == brute[i].second &&
               std::abs(got[i].distance_meters - brute[i].first) <= kGeoDistanceTolerance;
      }
      if (!same) ++mismatches;
    }
    if (mismatches) o.pass = false;
    o.detail += "geo 10000/200 mismatches=" + std::to_string(mismatches) + "; ";
  }

  // sameAs: 1,000 entities, 2,000 links.
  {
    store::QuadStore st;
    const int n = 1000;
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<std::pair<int, int>> edges;
    auto iri = [](int i) { return Iri("http://example.org/ent/" + std::to_string(1000 + i)); };
    while (edges.size() < 2000) {
      int a = pick(rng), b = pick(rng);
      if (a == b) continue;
      edges.emplace_back(a, b);
      st.add_same_as(iri(a), iri(b), Iri("http://example.org/links"));
    }
    auto comps = oracle::components(n, edges);
    std::vector<int> root(n);
    for (const auto& [k, members] : comps)
      for (int m : members) root[m] = k;
    size_t bad = 0;
    for (int i = 0; i < n; ++i) {
      std::vector<std::string> want;
      for (int m : comps[root[i]]) want.push_back(iri(m).str());
      std::sort(want.begin(), want.end());
      std::vector<std::string> got;
      for (const auto& x : st.resolve(iri(i))) got.push_back(x.str());
      if (got != want) ++bad;
    }
    if (bad) o.pass = false;
    o.detail += "sameAs 1000/2000 classes=" + std::to_string(comps.size()) + " mismatches=" + std::to_string(bad) + "; ";
  }

  // String metrics: 10,000 fuzzed pairs.
  {
    size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
      auto [a, b] = test::fuzzed_pair(rng);
      bool ok = similarity::levenshtein_distance(a, b) == oracle::levenshtein(a, b) &&
                similarity::levenshtein_similarity(a, b) == oracle::levenshtein_similarity(a, b) &&
                similarity::dice(a, b) == oracle::dice(a, b) && similarity::jaccard(a, b) == oracle::jaccard(a, b);
      if (!ok) ++bad;
    }
    if (bad) o.pass = false;
    o.detail += "strings 10000 mismatches=" + std::to_string(bad);
  }
  return o;
}

// Registers and processes every file fixture into `store` at a fixed time.
void ingest_fixtures(store::QuadStore& store) {
  ingest::StagingStore staging;
  ingest::Pipeline pipeline(store, staging);
  auto now = parse_datetime("2015-03-02T09:00:00+01:00");
  auto reg = [&](const std::string& dir, const std::string& name) {
    auto d = ingest::DatasetDescriptor::parse(read_file(test::data_path("fixtures/" + dir + "/" + name + ".descriptor")));
    auto m = ingest::MappingSpec::parse(read_file(test::data_path("fixtures/" + dir + "/" + name + ".mapping")));
    pipeline.register_dataset(d, m);
    return d.id;
  };
  auto roads = reg("roads", "roads");
  pipeline.process_file(roads, test::data_path("fixtures/roads/roads.csv"), now);
  auto services = reg("services", "services");
  pipeline.process_file(services, test::data_path("fixtures/services/services.csv"), now);
  auto poly = reg("polyline", "polyline");
  pipeline.process_file(poly, test::data_path("fixtures/polyline/viale.txt"), now);
  auto weather = reg("weather", "weather");
  for (const auto& f : fs::directory_iterator(test::data_path("fixtures/weather/files"))) {
    pipeline.process_file(weather, f.path(), now);
  }
}

Outcome determinism_and_deletion() {
  store::QuadStore a, b;
  ingest_fixtures(a);
  ingest_fixtures(b);
  auto ea = a.export_nquads();
  bool identical = ea == b.export_nquads() && !ea.empty();

  Iri ctx(ingest::dataset_context_iri("firenze-roads"));
  store::Pattern in_ctx;
  in_ctx.context = ctx;
  auto doomed = a.match(in_ctx);
  auto before = parse_nquads(ea);
  size_t removed = a.remove_context(ctx);
  auto after = parse_nquads(a.export_nquads());
  // Both ways: what went is exactly the context, what stayed is everything else.
  std::vector<Quad> expected_rest;
  for (const auto& q : before)
    if (q.context != ctx) expected_rest.push_back(q);
  std::sort(doomed.begin(), doomed.end());
  std::vector<Quad> gone;
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(gone));
  bool exact = removed == doomed.size() && !doomed.empty() && after == expected_rest && gone == doomed &&
               before.size() - after.size() == removed && a.count(in_ctx) == 0;

  Outcome o{identical && exact, "", false};
  o.detail = "export " + std::to_string(ea.size()) + " bytes " + (identical ? "identical" : "DIFFERENT") +
             "; context quads=" + std::to_string(doomed.size()) + " removed=" + std::to_string(removed) +
             " store " + std::to_string(before.size()) + "->" + std::to_string(after.size());
  return o;
}

Outcome compaction_round_trip() {
  test::TempDir dir;
  auto samples = test::avm_history(10000, 25, 60, 4242);
  store::QuadStore st;
  Iri ctx = test::load_avm(st, samples);
  auto before = parse_nquads(st.export_nquads());
  auto now = parse_datetime("2015-04-30T00:00:00Z");
  auto report = st.compact(parse_duration("P30D"), now, store::AggregationSpec::avm_delay(), dir.path());

  auto archived = parse_nquads(read_file(report.archive_path));
  st.insert(archived);
  std::string agg_prefix = ctx.str() + "/aggregate/";
  std::vector<Quad> restored;
  for (const auto& q : parse_nquads(st.export_nquads()))
    if (!starts_with(q.subject.str(), agg_prefix)) restored.push_back(q);
  bool round_trip = restored == before && archived.size() == report.dropped_quad_count;

  auto want = test::brute_force_aggregates(samples, "2015-03-31T00:00:00Z");
  auto got = test::stored_aggregates(st);
  bool aggregates = got == want && want.size() == report.aggregate_entity_count;
  size_t old_records = static_cast<size_t>(std::count_if(
      samples.begin(), samples.end(), [](const auto& s) { return s.timestamp < std::string("2015-03-31T00:00:00Z"); }));

  Outcome o{round_trip && aggregates && old_records > 0, "", false};
  o.detail = "records=10000 dropped records=" + std::to_string(old_records) +
             " quads=" + std::to_string(report.dropped_quad_count) + " restore " + (round_trip ? "exact" : "MISMATCH") +
             "; aggregates " + std::to_string(got.size()) + "/" + std::to_string(want.size()) +
             (aggregates ? " exact" : " MISMATCH");
  return o;
}

Outcome growth_arithmetic() {
  test::TempDir dir;
  std::vector<std::pair<std::string, std::string>> towns;
  for (const auto& line : split(read_file(test::data_path("istat.tsv")), '\n')) {
    auto cols = split(line, '\t');
    if (cols.size() >= 2 && !line.empty() && line[0] != '#') towns.emplace_back(cols[0], cols[1]);
  }
  const size_t n = towns.size();

  store::QuadStore st;
  ingest::StagingStore staging;
  ingest::Pipeline pipeline(st, staging);
  auto d = ingest::DatasetDescriptor::parse(read_file(test::data_path("fixtures/weather/weather.descriptor")));
  pipeline.register_dataset(d, ingest::MappingSpec::parse(read_file(test::data_path("fixtures/weather/weather.mapping"))));

  // Each run produces one report of 16 prediction lines per municipality.
  auto source = [&](const std::string&, const DateTime& now) {
    std::vector<fs::path> files;
    std::string stamp = compact_utc_stamp(now);
    std::string report_time = format_datetime(now);
    for (const auto& [name, code] : towns) {
      std::string csv = "municipality;istat;report_time;day;hour;description;min;max\n";
      for (int day = 0; day < 4; ++day) {
        for (int hour = 0; hour < 24; hour += 6) {
          char line[256];
          std::snprintf(line, sizeof line, "%s;%s;%s;+%d;%02d;sereno;%d;%d\n", name.c_str(), code.c_str(),
                        report_time.c_str(), day, hour, 3 + day, 12 + hour / 6);
          csv += line;
        }
      }
      auto path = dir.path() / (code + "-" + stamp + ".csv");
      write_file(path.string(), csv);
      files.push_back(path);
    }
    return files;
  };
  sched::Scheduler scheduler(pipeline, source);
  auto start = parse_datetime("2015-03-01T00:00:00Z");
  scheduler.add({d.id, start, parse_duration("PT12H"), 1});
  DateTime until{add(start.instant, parse_duration("P30D")) - std::chrono::milliseconds(1), 0};
  auto reports = scheduler.run_until(until);
  size_t failed = static_cast<size_t>(std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.ok; }));
  size_t staged = staging.size(d.id);
  double expected = static_cast<double>(n) * 960.0;
  double rel = std::abs(static_cast<double>(staged) - expected) / expected;
  Outcome o{rel <= kGrowthTolerance && failed == 0, "", false};
  o.detail = "N=" + std::to_string(n) + " runs=" + std::to_string(reports.size()) + " failed=" +
             std::to_string(failed) + " staged=" + std::to_string(staged) + " expected=" +
             std::to_string(static_cast<size_t>(expected)) + " deviation=" + fmt("%.4f", rel);
  return o;
}

Outcome table_additivity() {
  store::QuadStore st;
  ingest_fixtures(st);
  std::mt19937_64 rng(11);
  std::vector<std::string> extra;
  for (int i = 0; i < 30; ++i) extra.push_back("http://example.org/ctx/" + std::to_string(i));
  size_t trials = 0, bad = 0;
  for (int round = 0; round < 40; ++round) {
    // Random tags (some contexts stay untagged) and a random batch of quads.
    for (const auto& c : extra) {
      if (rng() % 5 == 0) continue;
      store::ContextTag tag;
      tag.macroclass = schema::kAllMacroClasses[rng() % std::size(schema::kAllMacroClasses)];
      tag.kind = static_cast<store::DataKind>(rng() % 3);
      st.tag_context(Iri(c), tag);
    }
    std::vector<Quad> batch;
    size_t m = rng() % 500;
    for (size_t i = 0; i < m; ++i) {
      batch.push_back(make_quad("http://example.org/s/" + std::to_string(rng() % 1000),
                                "http://example.org/p/" + std::to_string(rng() % 5),
                                Term::literal(std::to_string(rng() % 100)), extra[rng() % extra.size()]));
    }
    st.insert(batch);

    auto stats = st.store_stats();
    // Independent recount per context.
    std::map<std::pair<int, int>, uint64_t> cells;  // (macroclass or -1, kind) -> count
    uint64_t total = 0;
    for (const auto& c : st.contexts()) {
      store::Pattern p;
      p.context = c;
      uint64_t k = st.count(p);
      total += k;
      auto tag = st.context_tag(c);
      int row = tag ? static_cast<int>(tag->macroclass) : -1;
      int col = tag ? static_cast<int>(tag->kind) : 0;
      cells[{row, col}] += k;
    }
    bool ok = stats.consistent() && total == st.size() && stats.totals().row_total() == total;
    for (auto mc : schema::kAllMacroClasses) {
      for (int k = 0; k < 3; ++k) {
        auto it = cells.find({static_cast<int>(mc), k});
        uint64_t want = it == cells.end() ? 0 : it->second;
        ok = ok && stats.row(mc).at(static_cast<store::DataKind>(k)) == want;
      }
    }
    uint64_t unclassified = 0;
    for (const auto& [key, v] : cells)
      if (key.first == -1) unclassified += v;
    ok = ok && stats.unclassified().row_total() == unclassified;
    ++trials;
    if (!ok) ++bad;
  }
  Outcome o{bad == 0, "", false};
  o.detail = std::to_string(trials) + " random distributions over the fixture store, failures=" + std::to_string(bad) +
             ", final total=" + std::to_string(st.size());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"f1-formula", f1_fidelity},
      {"method-orderings", table_orderings},
      {"schema-constraints", schema_suite},
      {"oracle-equivalences", oracle_equivalences},
      {"determinism-provenance", determinism_and_deletion},
      {"compaction-round-trip", compaction_round_trip},
      {"growth-arithmetic", growth_arithmetic},
      {"stats-additivity", table_additivity},
  };
  int failures = 0;
  int known = 0;
  for (const auto& c : criteria) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = Outcome{false, std::string("exception: ") + e.what(), false};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-24s %s [%.2fs]%s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                !o.pass && o.known_unattainable ? " (known unattainable)" : "");
    std::fflush(stdout);
    if (!o.pass) {
      if (o.known_unattainable) {
        ++known;
      } else {
        ++failures;
      }
    }
  }
  std::printf("%d criteria, %d failed, %d known unattainable\n", static_cast<int>(std::size(criteria)),
              failures + known, known);
  return failures == 0 ? 0 : 1;
}

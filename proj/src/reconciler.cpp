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

#include "km4/reconciler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "km4/common.hpp"
#include "km4/similarity.hpp"
#include "km4/vocab.hpp"

namespace km4::reconcile {

namespace {

constexpr std::pair<Method, std::string_view> kMethods[] = {
    {Method::kExact1, "exact1"},           {Method::kExact2, "exact2"},
    {Method::kExact3, "exact3"},           {Method::kLevenshtein, "levenshtein"},
    {Method::kDice, "dice"},               {Method::kJaccard, "jaccard"},
    {Method::kKbLevenshtein, "kbLevenshtein"}, {Method::kManual, "manual"},
};

std::string fold(std::string_view s) { return address::basic_fold(address::fold_accents(s)); }

/// Folded name without a leading qualifier (in any table spelling).
std::string strip_qualifier(const std::string& folded, const address::QualifierTable& table) {
  auto tokens = split_whitespace(folded);
  if (!tokens.empty()) {
    auto canon = table.lookup(tokens.front());
    const std::string& q = canon ? *canon : tokens.front();
    if (table.is_qualifier(q)) tokens.erase(tokens.begin());
  }
  return join(tokens, " ");
}

std::vector<std::string> orderings_of(const address::NormalizedAddress& n) {
  std::vector<std::string> out;
  for (const auto& o : address::name_orderings(n)) {
    std::string name = join(o, " ");
    if (n.qualifier.empty()) {
      out.push_back(name);
    } else {
      out.push_back(o.empty() ? n.qualifier : n.qualifier + " " + name);
    }
  }
  return out;
}

/// First catalog number of `road` matching any parsed civic.
const CatalogNumber* match_number(const CatalogRoad& road, const std::vector<address::CivicNumber>& civics) {
  for (const auto& c : civics) {
    for (const auto& n : road.numbers) {
      if (c.same_number(n.civic)) return &n;
    }
  }
  return nullptr;
}

/// Colour rule: a civic written without colour is a black number.
std::vector<address::CivicNumber> with_default_color(std::vector<address::CivicNumber> civics) {
  for (auto& c : civics) {
    if (c.value && c.color == address::CivicColor::kNone) c.color = address::CivicColor::kBlack;
  }
  return civics;
}

MatchCandidate make_candidate(const TargetService& s, const CatalogRoad& road, const CatalogNumber* number,
                              Method m, double score) {
  MatchCandidate c;
  c.service = s.iri;
  c.road = road.iri;
  if (number) {
    c.street_number = number->iri;
    c.level = Level::kNumber;
  } else {
    c.level = Level::kStreet;
  }
  c.method = m;
  c.score = score;
  return c;
}

bool ranked_before(const MatchCandidate& a, const MatchCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.road.str() < b.road.str();
}

}  // namespace

std::string_view to_string(Level l) { return l == Level::kNumber ? "number" : "street"; }

std::optional<Level> level_from_string(std::string_view s) {
  if (s == "number") return Level::kNumber;
  if (s == "street") return Level::kStreet;
  return std::nullopt;
}

std::string_view to_string(Method m) {
  for (const auto& [k, n] : kMethods) {
    if (k == m) return n;
  }
  return "";
}

std::optional<Method> method_from_string(std::string_view s) {
  if (s == "exact") return Method::kExact1;
  if (s == "kb-levenshtein" || s == "kblevenshtein") return Method::kKbLevenshtein;
  for (const auto& [k, n] : kMethods) {
    if (n == s) return k;
  }
  return std::nullopt;
}

bool is_exact(Method m) { return m == Method::kExact1 || m == Method::kExact2 || m == Method::kExact3; }

// ---------------------------------------------------------------------------
// Services

std::vector<TargetService> parse_services(std::string_view text) {
  std::vector<TargetService> out;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    auto where = "services line " + std::to_string(lineno) + ": ";
    if (cols.size() != 4 && cols.size() != 6) throw_error(ErrorCode::kParse, where + "expected 4 or 6 columns");
    TargetService s;
    if (!Iri::is_valid(cols[0])) throw_error(ErrorCode::kParse, where + "invalid IRI");
    s.iri = Iri(cols[0]);
    s.address = address::RawAddress{cols[1], cols[2], cols[3], std::nullopt};
    if (cols.size() == 6 && !(trim(cols[4]).empty() && trim(cols[5]).empty())) {
      if (!Literal::is_valid(trim(cols[4]), Datatype::kDecimal) ||
          !Literal::is_valid(trim(cols[5]), Datatype::kDecimal)) {
        throw_error(ErrorCode::kParse, where + "invalid coordinates");
      }
      double lat = std::stod(trim(cols[4]));
      double lon = std::stod(trim(cols[5]));
      if (!geo::GeoPoint::is_valid(lat, lon)) throw_error(ErrorCode::kParse, where + "coordinates out of range");
      s.coordinates = geo::GeoPoint{lat, lon};
    }
    if (trim(s.address.street).empty() && !s.coordinates) {
      throw_error(ErrorCode::kParse, where + "service needs an address or coordinates");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TargetService> load_services(const std::string& path) { return parse_services(read_file(path)); }

std::string serialize_services(const std::vector<TargetService>& services) {
  std::ostringstream out;
  out << "# iri\tstreet\tcivic\tmunicipality\tlat\tlong\n";
  for (const auto& s : services) {
    out << s.iri.str() << '\t' << s.address.street << '\t' << s.address.civic << '\t' << s.address.municipality;
    if (s.coordinates) out << '\t' << format_double(s.coordinates->lat) << '\t' << format_double(s.coordinates->lon);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Catalog

ToponymCatalog::ToponymCatalog(address::QualifierTable table) : table_(std::move(table)) {}

std::string ToponymCatalog::municipality_key(std::string_view name) { return fold(name); }

void ToponymCatalog::add_road(const Iri& iri, std::string_view municipality, std::string_view official,
                              std::string_view alternative) {
  if (road_index_.count(iri.str())) throw_error(ErrorCode::kConflict, "duplicate road: " + iri.str());
  if (trim(official).empty()) throw_error(ErrorCode::kInvalidArgument, "road without official name: " + iri.str());
  CatalogRoad r;
  r.iri = iri;
  r.municipality = municipality_key(municipality);
  r.official_name = trim(official);
  r.alternative_name = trim(alternative);
  for (const auto& name : {r.official_name, r.alternative_name}) {
    if (name.empty()) continue;
    r.folded.push_back(fold(name));
    auto n = address::normalize({name, "", "", {}}, table_);
    r.normalized.push_back(n.street());
    r.stripped.push_back(strip_qualifier(r.folded.back(), table_));
    r.last_words.push_back(n.last_word_key);
  }
  road_index_[iri.str()] = roads_.size();
  by_municipality_[r.municipality].push_back(roads_.size());
  roads_.push_back(std::move(r));
}

void ToponymCatalog::add_number(const Iri& road, const Iri& number, std::string_view civic_text,
                                std::optional<Iri> entry) {
  auto it = road_index_.find(road.str());
  if (it == road_index_.end()) throw_error(ErrorCode::kNotFound, "street number on unknown road: " + road.str());
  if (number_index_.count(number.str())) throw_error(ErrorCode::kConflict, "duplicate street number: " + number.str());
  auto civics = with_default_color(address::parse_civic(civic_text));
  CatalogNumber n{number, std::string(trim(civic_text)), civics.front(), std::move(entry)};
  auto& numbers = roads_[it->second].numbers;
  number_index_[number.str()] = {it->second, numbers.size()};
  numbers.push_back(std::move(n));
}

void ToponymCatalog::add_alias(std::string_view alias, std::string_view municipality) {
  aliases_[municipality_key(alias)] = municipality_key(municipality);
}

const CatalogRoad* ToponymCatalog::find_road(const Iri& iri) const {
  auto it = road_index_.find(iri.str());
  return it == road_index_.end() ? nullptr : &roads_[it->second];
}

const CatalogNumber* ToponymCatalog::find_number(const Iri& iri) const {
  auto it = number_index_.find(iri.str());
  return it == number_index_.end() ? nullptr : &roads_[it->second.first].numbers[it->second.second];
}

const std::vector<size_t>& ToponymCatalog::roads_in(std::string_view municipality) const {
  static const std::vector<size_t> kEmpty;
  auto it = by_municipality_.find(municipality_key(municipality));
  return it == by_municipality_.end() ? kEmpty : it->second;
}

std::string ToponymCatalog::resolve_municipality(std::string_view name) const {
  std::string key = municipality_key(name);
  auto it = aliases_.find(key);
  return it == aliases_.end() ? key : it->second;
}

ToponymCatalog ToponymCatalog::parse(std::string_view text, address::QualifierTable table) {
  ToponymCatalog c(std::move(table));
  size_t lineno = 0;
  auto opt = [](const std::string& v) { return v == "-" ? std::string() : v; };
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    auto where = "catalog line " + std::to_string(lineno) + ": ";
    try {
      if (cols[0] == "ROAD" && cols.size() == 5) {
        c.add_road(Iri(cols[1]), cols[2], cols[3], opt(cols[4]));
      } else if (cols[0] == "NUMBER" && cols.size() == 5) {
        std::optional<Iri> entry;
        if (cols[4] != "-") entry = Iri(cols[4]);
        c.add_number(Iri(cols[1]), Iri(cols[2]), cols[3], entry);
      } else if (cols[0] == "ALIAS" && cols.size() == 3) {
        c.add_alias(cols[1], cols[2]);
      } else {
        throw_error(ErrorCode::kParse, "unrecognized row");
      }
    } catch (const Error& e) {
      throw Error(e.code() == ErrorCode::kInvalidArgument ? ErrorCode::kParse : e.code(), where + e.what());
    }
  }
  return c;
}

ToponymCatalog ToponymCatalog::load(const std::string& path, address::QualifierTable table) {
  return parse(read_file(path), std::move(table));
}

std::string ToponymCatalog::serialize() const {
  std::ostringstream out;
  for (const auto& r : roads_) {
    out << "ROAD\t" << r.iri.str() << '\t' << r.municipality << '\t' << r.official_name << '\t'
        << (r.alternative_name.empty() ? "-" : r.alternative_name) << '\n';
  }
  for (const auto& r : roads_) {
    for (const auto& n : r.numbers) {
      out << "NUMBER\t" << r.iri.str() << '\t' << n.iri.str() << '\t' << n.civic_text << '\t'
          << (n.entry ? n.entry->str() : "-") << '\n';
    }
  }
  for (const auto& [alias, muni] : aliases_) out << "ALIAS\t" << alias << '\t' << muni << '\n';
  return out.str();
}

ToponymCatalog ToponymCatalog::from_store(const store::QuadStore& store, address::QualifierTable table) {
  ToponymCatalog c(std::move(table));
  const Iri rdf_type{std::string(vocab::kRdfType)};
  auto first_value = [&](const Iri& s, std::string_view prop) -> std::string {
    store::Pattern p;
    p.subject = s;
    p.predicate = Iri(vocab::km4c(prop));
    auto rows = store.match(p);
    return rows.empty() ? std::string() : rows.front().object.value();
  };
  auto instances = [&](std::string_view cls) {
    store::Pattern p;
    p.predicate = rdf_type;
    p.object = Term(Iri(vocab::km4c(cls)));
    std::set<std::string> out;
    for (const auto& q : store.match(p)) out.insert(q.subject.str());
    return out;
  };
  for (const auto& road : instances("Road")) {
    Iri r(road);
    std::string name = first_value(r, "name");
    if (name.empty()) name = first_value(r, "extendName");
    std::string muni = first_value(r, "municipalityName");
    if (muni.empty()) {
      std::string m = first_value(r, "inMunicipalityOf");
      if (!m.empty()) muni = first_value(Iri(m), "name");
    }
    if (name.empty() || muni.empty()) continue;
    c.add_road(r, muni, name, first_value(r, "alternativeName"));
  }
  for (const auto& num : instances("StreetNumber")) {
    Iri n(num);
    std::string road = first_value(n, "belongToRoad");
    std::string value = first_value(n, "number");
    if (road.empty() || value.empty() || !c.find_road(Iri(road))) continue;
    std::string code = to_upper_ascii(first_value(n, "classCode"));
    std::string text = value;
    if (code == "R" || code == "ROSSO" || code == "RED") text += "/R";
    std::optional<Iri> entry;
    std::string e = first_value(n, "hasExternalAccess");
    if (!e.empty()) entry = Iri(e);
    c.add_number(Iri(road), n, text, entry);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Matching

void MethodConfig::validate() const {
  if (!(review_threshold >= 0 && review_threshold <= accept_threshold && accept_threshold <= 1)) {
    throw_error(ErrorCode::kInvalidArgument, "thresholds must satisfy 0 <= review <= accept <= 1");
  }
  if (location_weight < 0 || street_weight < 0 || location_weight + street_weight <= 0) {
    throw_error(ErrorCode::kInvalidArgument, "weights must be non-negative with a positive sum");
  }
  if (tie_gap < 0) throw_error(ErrorCode::kInvalidArgument, "tie gap must be non-negative");
}

double string_similarity(Method metric, std::string_view a, std::string_view b) {
  switch (metric) {
    case Method::kLevenshtein:
    case Method::kKbLevenshtein: return similarity::levenshtein_similarity(a, b);
    case Method::kDice: return similarity::dice(a, b);
    case Method::kJaccard: return similarity::jaccard(a, b);
    default: return a == b ? 1.0 : 0.0;
  }
}

std::optional<MatchCandidate> reconcile_exact(const TargetService& service, const ToponymCatalog& catalog) {
  if (trim(service.address.street).empty()) return std::nullopt;
  const auto& roads = catalog.roads_in(service.address.municipality);
  if (roads.empty()) return std::nullopt;
  const auto norm = address::normalize(service.address, catalog.qualifiers());
  const auto civics = with_default_color(norm.civics);
  const std::string folded = fold(service.address.street);
  const std::string normalized = norm.street();

  // Each step returns the matching road, if any.
  auto step = [&](int n) -> const CatalogRoad* {
    if (n == 3) {
      const CatalogRoad* hit = nullptr;
      if (norm.last_word_key.empty()) return nullptr;
      for (size_t i : roads) {
        const auto& r = catalog.roads()[i];
        if (std::find(r.last_words.begin(), r.last_words.end(), norm.last_word_key) == r.last_words.end()) continue;
        if (hit) return nullptr;  // not unique
        hit = &r;
      }
      return hit;
    }
    for (size_t i : roads) {
      const auto& r = catalog.roads()[i];
      const auto& keys = n == 1 ? r.folded : r.normalized;
      const std::string& probe = n == 1 ? folded : normalized;
      if (std::find(keys.begin(), keys.end(), probe) != keys.end()) return &r;
    }
    return nullptr;
  };
  const Method methods[] = {Method::kExact1, Method::kExact2, Method::kExact3};
  for (Level level : {Level::kNumber, Level::kStreet}) {
    for (int n = 1; n <= 3; ++n) {
      const CatalogRoad* road = step(n);
      if (!road) continue;
      if (level == Level::kNumber) {
        const CatalogNumber* num = match_number(*road, civics);
        if (!num) continue;
        return make_candidate(service, *road, num, methods[n - 1], 1.0);
      }
      return make_candidate(service, *road, nullptr, methods[n - 1], 1.0);
    }
  }
  return std::nullopt;
}

std::vector<MatchCandidate> link_discover(const TargetService& service, const ToponymCatalog& catalog,
                                          const MethodConfig& cfg) {
  cfg.validate();
  std::vector<MatchCandidate> out;
  if (trim(service.address.street).empty()) return out;
  const Method metric = cfg.metric;
  if (is_exact(metric) || metric == Method::kManual) {
    throw_error(ErrorCode::kInvalidArgument, "link discovery needs a string metric, got " +
                                                 std::string(to_string(metric)));
  }
  const bool kb = metric == Method::kKbLevenshtein;
  const auto& roads = kb ? catalog.roads_in(catalog.resolve_municipality(service.address.municipality))
                         : catalog.roads_in(service.address.municipality);
  if (roads.empty()) return out;

  const auto norm = address::normalize(service.address, catalog.qualifiers());
  const auto civics = with_default_color(norm.civics);
  const std::string folded = fold(service.address.street);
  const std::string stripped = strip_qualifier(folded, catalog.qualifiers());
  const std::vector<std::string> orderings = kb ? orderings_of(norm) : std::vector<std::string>{};
  const double wsum = cfg.location_weight + cfg.street_weight;

  for (size_t i : roads) {
    const auto& r = catalog.roads()[i];
    std::optional<size_t> best_distance;
    double best_sim = -1;
    for (size_t k = 0; k < r.folded.size(); ++k) {
      size_t distance = 0;
      double sim = 0;
      if (kb) {
        // Best ordering: smallest distance and highest similarity.
        distance = std::numeric_limits<size_t>::max();
        for (const auto& o : orderings) {
          distance = std::min(distance, similarity::levenshtein_distance(o, r.normalized[k]));
          sim = std::max(sim, similarity::levenshtein_similarity(o, r.normalized[k]));
        }
      } else {
        distance = similarity::levenshtein_distance(folded, r.folded[k]);
        switch (metric) {
          case Method::kLevenshtein: sim = similarity::levenshtein_similarity(folded, r.folded[k]); break;
          case Method::kDice: sim = similarity::dice(stripped, r.stripped[k]); break;
          case Method::kJaccard: sim = similarity::jaccard(folded, r.folded[k]); break;
          default: break;
        }
      }
      if (!best_distance || distance < *best_distance) best_distance = distance;
      best_sim = std::max(best_sim, sim);
    }
    if (!best_distance || *best_distance > cfg.street_edit_max) continue;
    double score = (cfg.location_weight * 1.0 + cfg.street_weight * best_sim) / wsum;
    MatchCandidate c = make_candidate(service, r, match_number(r, civics), metric, score);
    c.distance = best_distance;
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), ranked_before);
  return out;
}

std::string_view to_string(ReviewState s) {
  switch (s) {
    case ReviewState::kPending: return "pending";
    case ReviewState::kAccepted: return "accepted";
    case ReviewState::kRejected: return "rejected";
    case ReviewState::kSkipped: return "skipped";
  }
  return "";
}

Decision decide(const std::vector<MatchCandidate>& ranked, const MethodConfig& cfg) {
  cfg.validate();
  if (ranked.empty()) return NoMatch{};
  const double top = ranked[0].score;
  const bool tie = ranked.size() > 1 && ranked[1].score == top;
  const bool clear = ranked.size() == 1 || top - ranked[1].score >= cfg.tie_gap - 1e-12;
  if (top >= cfg.accept_threshold && clear && !tie) return AutoAccept{ranked[0]};
  if (top >= cfg.review_threshold || tie) {
    ReviewItem item;
    item.service = ranked[0].service;
    for (const auto& c : ranked) {
      if (c.score >= cfg.review_threshold || c.score == top) item.candidates.push_back(c);
    }
    return Review{std::move(item)};
  }
  return NoMatch{};
}

std::string service_location_iri(const Iri& service) { return service.str() + "/location"; }

std::vector<Quad> apply_decision(const MatchCandidate& accepted, store::QuadStore& store,
                                 const ToponymCatalog& catalog) {
  const Iri ctx{std::string(vocab::kReconciliationContext)};
  const Iri has_access(vocab::km4c("hasAccess"));
  const Iri is_in_road(vocab::km4c("isInRoad"));
  const Iri same_as{std::string(vocab::kOwlSameAs)};
  const Iri location(service_location_iri(accepted.service));

  std::vector<Quad> quads;
  if (accepted.level == Level::kNumber) {
    if (!accepted.street_number) {
      throw_error(ErrorCode::kInvalidArgument, "number-level link without a street number");
    }
    const CatalogNumber* n = catalog.find_number(*accepted.street_number);
    Iri entry = n && n->entry ? *n->entry : Iri(accepted.street_number->str() + "/entry");
    store::Pattern p;
    p.subject = accepted.service;
    p.predicate = has_access;
    for (const auto& q : store.match(p)) {
      if (q.object != Term(entry)) {
        throw_error(ErrorCode::kConflict, "service " + accepted.service.str() +
                                              " already has an external access: " + q.object.value());
      }
    }
    quads.push_back(Quad{location, same_as, Term(*accepted.street_number), ctx});
    quads.push_back(Quad{accepted.service, has_access, Term(entry), ctx});
  } else {
    quads.push_back(Quad{location, same_as, Term(accepted.road), ctx});
    quads.push_back(Quad{accepted.service, is_in_road, Term(accepted.road), ctx});
  }
  store.tag_context(ctx, store::ContextTag{schema::MacroClass::kPointOfInterest, store::DataKind::kReconciliation, 0});
  std::vector<Quad> fresh;
  for (const auto& q : quads) {
    store::Pattern p;
    p.subject = q.subject;
    p.predicate = q.predicate;
    p.object = q.object;
    p.context = q.context;
    if (store.count(p) > 0) continue;
    if (q.predicate == same_as) {
      store.add_same_as(q.subject, q.object.as_iri(), ctx);
    } else {
      store.insert(q);
    }
    fresh.push_back(q);
  }
  return fresh;
}

CorpusResult reconcile_corpus(const std::vector<TargetService>& services, const ToponymCatalog& catalog,
                              Method method, const MethodConfig& cfg) {
  cfg.validate();
  CorpusResult out;
  out.summary.services = services.size();
  MethodConfig review_cfg = cfg;
  review_cfg.metric = is_exact(method) ? Method::kKbLevenshtein : method;
  size_t next_id = 0;

  auto accept = [&](MatchCandidate c) {
    ++out.summary.auto_accepted;
    ++(c.level == Level::kNumber ? out.summary.number_level : out.summary.street_level);
    out.links.push_back(std::move(c));
  };
  auto queue = [&](ReviewItem item) {
    ++out.summary.review;
    item.id = "r" + std::to_string(++next_id);
    out.review_queue.push_back(std::move(item));
  };
  auto none = [&](const TargetService& s) {
    ++out.summary.no_match;
    if (s.coordinates) ++out.summary.unresolved_with_coordinates;
  };

  for (const auto& s : services) {
    if (is_exact(method)) {
      if (auto c = reconcile_exact(s, catalog)) {
        accept(std::move(*c));
        continue;
      }
      auto ranked = link_discover(s, catalog, review_cfg);
      std::vector<MatchCandidate> kept;
      for (const auto& c : ranked) {
        if (c.score >= cfg.review_threshold) kept.push_back(c);
      }
      if (kept.empty()) {
        none(s);
        continue;
      }
      ReviewItem item;
      item.service = s.iri;
      item.candidates = std::move(kept);
      queue(std::move(item));
      continue;
    }
    auto d = decide(link_discover(s, catalog, review_cfg), cfg);
    if (auto* a = std::get_if<AutoAccept>(&d)) {
      accept(a->candidate);
    } else if (auto* r = std::get_if<Review>(&d)) {
      queue(std::move(r->item));
    } else {
      none(s);
    }
  }
  // Most ambiguous first.
  std::stable_sort(out.review_queue.begin(), out.review_queue.end(), [](const ReviewItem& a, const ReviewItem& b) {
    return a.candidates.front().score < b.candidates.front().score;
  });
  return out;
}

std::string serialize_links(const std::vector<MatchCandidate>& links) {
  std::ostringstream out;
  for (const auto& l : links) {
    out << l.service.str() << '\t' << l.road.str() << '\t' << (l.street_number ? l.street_number->str() : "-")
        << '\t' << to_string(l.level) << '\t' << to_string(l.method) << '\t' << format_double(l.score) << '\n';
  }
  return out.str();
}

std::vector<MatchCandidate> parse_links(std::string_view text) {
  std::vector<MatchCandidate> out;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    auto where = "links line " + std::to_string(lineno) + ": ";
    if (cols.size() != 6) throw_error(ErrorCode::kParse, where + "expected 6 columns");
    MatchCandidate c;
    try {
      c.service = Iri(cols[0]);
      c.road = Iri(cols[1]);
      if (cols[2] != "-") c.street_number = Iri(cols[2]);
    } catch (const Error& e) {
      throw_error(ErrorCode::kParse, where + e.what());
    }
    auto level = level_from_string(cols[3]);
    auto method = method_from_string(cols[4]);
    if (!level) throw_error(ErrorCode::kParse, where + "unknown level " + cols[3]);
    if (!method) throw_error(ErrorCode::kParse, where + "unknown method " + cols[4]);
    if (*level == Level::kNumber && !c.street_number) {
      throw_error(ErrorCode::kParse, where + "number-level link without street number");
    }
    c.level = *level;
    c.method = *method;
    if (!Literal::is_valid(cols[5], Datatype::kDecimal)) throw_error(ErrorCode::kParse, where + "bad score");
    c.score = std::stod(cols[5]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace km4::reconcile

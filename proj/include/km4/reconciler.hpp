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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "km4/address.hpp"
#include "km4/geo.hpp"
#include "km4/quad.hpp"
#include "km4/quadstore.hpp"
#include "km4/time.hpp"

namespace km4::reconcile {

enum class Level { kNumber, kStreet };
enum class Method { kExact1, kExact2, kExact3, kLevenshtein, kDice, kJaccard, kKbLevenshtein, kManual };

std::string_view to_string(Level l);
std::optional<Level> level_from_string(std::string_view s);
std::string_view to_string(Method m);
/// Accepts the names printed by to_string plus "exact" and "kb-levenshtein".
std::optional<Method> method_from_string(std::string_view s);
bool is_exact(Method m);

struct TargetService {
  Iri iri;
  address::RawAddress address;
  std::optional<geo::GeoPoint> coordinates;
};

/// `iri<TAB>street<TAB>civic<TAB>municipality[<TAB>lat<TAB>long]`; lines
/// starting with '#' are comments.
std::vector<TargetService> parse_services(std::string_view text);
std::vector<TargetService> load_services(const std::string& path);
std::string serialize_services(const std::vector<TargetService>& services);

struct CatalogNumber {
  Iri iri;
  std::string civic_text;
  address::CivicNumber civic;
  std::optional<Iri> entry;
};

struct CatalogRoad {
  Iri iri;
  std::string municipality;
  std::string official_name;
  std::string alternative_name;
  std::vector<CatalogNumber> numbers;

  // Derived keys, filled by ToponymCatalog.
  std::vector<std::string> folded;      // accent/case folded names
  std::vector<std::string> normalized;  // normalizer street form
  std::vector<std::string> stripped;    // folded name without qualifier
  std::vector<std::string> last_words;
};

/// Roads grouped by municipality, with names pre-normalized.
class ToponymCatalog {
 public:
  explicit ToponymCatalog(address::QualifierTable table = address::QualifierTable::seed());

  /// Row formats (tab-separated):
  ///   ROAD   iri municipality officialName alternativeName|-
  ///   NUMBER roadIri numberIri civicText entryIri|-
  ///   ALIAS  aliasName municipality
  static ToponymCatalog parse(std::string_view text,
                              address::QualifierTable table = address::QualifierTable::seed());
  static ToponymCatalog load(const std::string& path,
                             address::QualifierTable table = address::QualifierTable::seed());
  /// Road, StreetNumber and Entry entities found in the store.
  static ToponymCatalog from_store(const store::QuadStore& store,
                                   address::QualifierTable table = address::QualifierTable::seed());
  std::string serialize() const;

  void add_road(const Iri& iri, std::string_view municipality, std::string_view official,
                std::string_view alternative = "");
  void add_number(const Iri& road, const Iri& number, std::string_view civic_text,
                  std::optional<Iri> entry = std::nullopt);
  void add_alias(std::string_view alias, std::string_view municipality);

  const std::vector<CatalogRoad>& roads() const { return roads_; }
  const CatalogRoad* find_road(const Iri& iri) const;
  const CatalogNumber* find_number(const Iri& iri) const;
  /// Indexes into roads() for an exact (folded) municipality name.
  const std::vector<size_t>& roads_in(std::string_view municipality) const;
  /// Folded municipality with aliases resolved.
  std::string resolve_municipality(std::string_view name) const;
  const address::QualifierTable& qualifiers() const { return table_; }
  static std::string municipality_key(std::string_view name);

 private:
  address::QualifierTable table_;
  std::vector<CatalogRoad> roads_;
  std::map<std::string, size_t> road_index_;
  std::map<std::string, std::pair<size_t, size_t>> number_index_;
  std::map<std::string, std::vector<size_t>> by_municipality_;
  std::map<std::string, std::string> aliases_;
};

struct MatchCandidate {
  Iri service;
  Iri road;
  std::optional<Iri> street_number;
  Level level = Level::kStreet;
  Method method = Method::kExact1;
  double score = 0;
  /// Edit distance behind the score, when a distance was computed.
  std::optional<size_t> distance;

  friend bool operator==(const MatchCandidate&, const MatchCandidate&) = default;
};

struct MethodConfig {
  Method metric = Method::kKbLevenshtein;
  size_t street_edit_max = 5;
  double location_weight = 0.5;
  double street_weight = 0.5;
  double accept_threshold = 0.95;
  double review_threshold = 0.60;
  double tie_gap = 0.05;

  void validate() const;
};

/// Similarity of two strings under a metric (exact methods compare for
/// equality).
double string_similarity(Method metric, std::string_view a, std::string_view b);

std::optional<MatchCandidate> reconcile_exact(const TargetService& service, const ToponymCatalog& catalog);

/// Ranked by score descending, ties by road IRI.
std::vector<MatchCandidate> link_discover(const TargetService& service, const ToponymCatalog& catalog,
                                          const MethodConfig& cfg);

enum class ReviewState { kPending, kAccepted, kRejected, kSkipped };
std::string_view to_string(ReviewState s);

struct ReviewItem {
  std::string id;
  Iri service;
  std::vector<MatchCandidate> candidates;
  ReviewState state = ReviewState::kPending;
  std::optional<size_t> chosen;
  std::optional<std::string> decided_by;
  std::optional<DateTime> decided_at;
};

struct AutoAccept {
  MatchCandidate candidate;
};
struct Review {
  ReviewItem item;
};
struct NoMatch {};
using Decision = std::variant<AutoAccept, Review, NoMatch>;

Decision decide(const std::vector<MatchCandidate>& ranked, const MethodConfig& cfg);

/// Writes the accepted link into the reconciliation context. Returns the
/// quads newly inserted (empty on re-application). A second, different
/// number-level link for one service throws Error(kConflict).
std::vector<Quad> apply_decision(const MatchCandidate& accepted, store::QuadStore& store,
                                 const ToponymCatalog& catalog);

/// IRI used for the service's location in sameAs links.
std::string service_location_iri(const Iri& service);

struct Summary {
  size_t services = 0;
  size_t number_level = 0;
  size_t street_level = 0;
  size_t auto_accepted = 0;
  size_t review = 0;
  size_t no_match = 0;
  size_t unresolved_with_coordinates = 0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct CorpusResult {
  std::vector<MatchCandidate> links;
  std::vector<ReviewItem> review_queue;
  Summary summary;
};

/// With an exact method all three steps run; services left unmatched are
/// queued for review with knowledge-based candidates. Other methods queue
/// their own Review outcomes.
CorpusResult reconcile_corpus(const std::vector<TargetService>& services, const ToponymCatalog& catalog,
                              Method method, const MethodConfig& cfg = {});

/// `serviceIri<TAB>roadIri<TAB>streetNumberIri|-<TAB>level<TAB>method<TAB>score`.
std::string serialize_links(const std::vector<MatchCandidate>& links);
std::vector<MatchCandidate> parse_links(std::string_view text);

}  // namespace km4::reconcile

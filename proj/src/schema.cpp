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

#include "km4/schema.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "km4/common.hpp"
#include "km4/vocab.hpp"

namespace km4::schema {

std::string_view to_string(MacroClass m) {
  switch (m) {
    case MacroClass::kAdministration: return "Administration";
    case MacroClass::kStreetGuide: return "StreetGuide";
    case MacroClass::kPointOfInterest: return "PointOfInterest";
    case MacroClass::kLocalPublicTransport: return "LocalPublicTransport";
    case MacroClass::kSensors: return "Sensors";
    case MacroClass::kTemporal: return "Temporal";
    case MacroClass::kMetadata: return "Metadata";
  }
  return "";
}

std::optional<MacroClass> macroclass_from_string(std::string_view s) {
  for (auto m : kAllMacroClasses) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

void Schema::add_class(ClassDef def) {
  if (class_index_.count(def.name)) {
    throw_error(ErrorCode::kInvalidArgument, "duplicate class: " + def.name);
  }
  class_index_.emplace(def.name, classes_.size());
  classes_.push_back(std::move(def));
}

void Schema::add_property(PropertyDef def) {
  if (property_index_.count(def.name)) {
    throw_error(ErrorCode::kInvalidArgument, "duplicate property: " + def.name);
  }
  property_index_.emplace(def.name, properties_.size());
  property_iri_index_.emplace(def.iri, properties_.size());
  properties_.push_back(std::move(def));
}

void Schema::finalize() {
  for (const auto& c : classes_) {
    std::set<std::string> seen{c.name};
    const ClassDef* cur = &c;
    while (cur->parent) {
      const ClassDef* p = find_class(*cur->parent);
      if (!p) throw_error(ErrorCode::kInvalidArgument, c.name + ": unknown parent " + *cur->parent);
      if (!seen.insert(p->name).second) {
        throw_error(ErrorCode::kInvalidArgument, "parent cycle through " + c.name);
      }
      cur = p;
    }
    for (const auto& k : c.constraints) {
      if (!find_property(k.property)) {
        throw_error(ErrorCode::kInvalidArgument, c.name + ": constraint on unknown property " + k.property);
      }
      if (k.min_card < 0 || (k.max_card && (*k.max_card < 1 || *k.max_card < k.min_card))) {
        throw_error(ErrorCode::kInvalidArgument, c.name + ": bad cardinality on " + k.property);
      }
    }
  }
}

const ClassDef* Schema::find_class(std::string_view name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes_[it->second];
}

const ClassDef& Schema::get_class(std::string_view name) const {
  const ClassDef* c = find_class(name);
  if (!c) throw_error(ErrorCode::kNotFound, "unknown class: " + std::string(name));
  return *c;
}

const PropertyDef* Schema::find_property(std::string_view name) const {
  auto it = property_index_.find(name);
  return it == property_index_.end() ? nullptr : &properties_[it->second];
}

const PropertyDef* Schema::find_property_by_iri(std::string_view iri) const {
  auto it = property_iri_index_.find(iri);
  return it == property_iri_index_.end() ? nullptr : &properties_[it->second];
}

std::vector<const ClassDef*> Schema::lineage(std::string_view name) const {
  std::vector<const ClassDef*> out;
  const ClassDef* cur = &get_class(name);
  while (cur) {
    out.push_back(cur);
    cur = cur->parent ? find_class(*cur->parent) : nullptr;
  }
  return out;
}

bool Schema::is_subclass_of(std::string_view child, std::string_view ancestor) const {
  if (!find_class(child)) return false;
  for (const ClassDef* c : lineage(child)) {
    if (c->name == ancestor) return true;
  }
  return false;
}

std::vector<PropertyConstraint> Schema::effective_constraints(std::string_view name) const {
  std::vector<PropertyConstraint> out;
  std::set<std::string> seen;
  for (const ClassDef* c : lineage(name)) {
    for (const auto& k : c->constraints) {
      if (seen.insert(k.property).second) out.push_back(k);
    }
  }
  return out;
}

std::string Schema::class_iri(std::string_view name) const {
  return vocab::km4c(name);
}

std::string Schema::property_iri(std::string_view name) const {
  const PropertyDef* p = find_property(name);
  if (!p) throw_error(ErrorCode::kNotFound, "unknown property: " + std::string(name));
  return p->iri;
}

std::string format_constraint(const PropertyConstraint& c) {
  std::string out = c.property + "[" + std::to_string(c.min_card) + ".." +
                    (c.max_card ? std::to_string(*c.max_card) : std::string("*")) + "]";
  if (!c.allowed_values.empty()) out += "{" + join(c.allowed_values, ",") + "}";
  if (c.severity == Severity::kWarning) out += "!warn";
  return out;
}

std::string Schema::dump() const {
  std::ostringstream out;
  for (const auto& c : classes_) {
    out << c.name << '\t' << to_string(c.macroclass) << '\t' << (c.parent ? *c.parent : "-") << '\t';
    for (size_t i = 0; i < c.constraints.size(); ++i) {
      if (i) out << "; ";
      out << format_constraint(c.constraints[i]);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

using MC = MacroClass;

PropertyConstraint obj(std::string prop, std::string range, int min, std::optional<int> max,
                       Severity sev = Severity::kError) {
  return PropertyConstraint{std::move(prop), PropertyKind::kObject, std::move(range), min, max, {}, sev};
}

PropertyConstraint dat(std::string prop, std::string range, int min, std::optional<int> max,
                       Severity sev = Severity::kError) {
  return PropertyConstraint{std::move(prop), PropertyKind::kData, std::move(range), min, max, {}, sev};
}

constexpr auto kWarn = Severity::kWarning;
constexpr std::optional<int> kMany = std::nullopt;

// Accommodation is the only Service subclass whose category list is spelled
// out; values kept verbatim, including the source's spelling.
const std::vector<std::string>& accommodation_categories() {
  static const std::vector<std::string> v = {
      "tourist_resort",  "hotel",           "tourist_home",     "rest_home",
      "religiuos_guest_house", "bed_and_breakfast", "hostel",   "summer_residence",
      "vacation_resort", "farmhouse",       "day_care_center",  "camping",
      "historic_residence", "mountain_dew",
  };
  return v;
}

void add_properties(Schema& s) {
  const std::vector<std::string> object_props = {
      // Administration
      "hasProvince", "hasMunicipality", "isPartOfProvince", "isPartOfRegion", "hasApprovedPA",
      "hasResolution", "hasStatistic",
      // Street guide
      "startsAtNode", "endsAtNode", "containsElement", "hasRoadElement", "formAdminRoad",
      "coincideWith", "hasRule", "accessToElement", "hasManeuver", "hasFirstElem", "hasSecondElem",
      "hasThirdElem", "concerningNode", "isInElement", "hasStreetNumber", "belongToRoad",
      "hasInternalAccess", "hasExternalAccess", "ownerAuthority", "managingAuthority", "starting",
      "ending", "inMunicipalityOf",
      // Points of interest
      "serviceCategory", "hasAccess", "isInRoad", "hasGRLocation",
      // Public transport
      "isPartOfLot", "scheduledOnLine", "hasRoute", "hasFirstSection", "hasSection", "hasFirstStop",
      "endsAtStop", "startsAtStop", "beginsAtJunction", "finishesAtJunction", "hasRouteLink",
      "isComposedBy", "composeSection", "isPartOfLine", "hasElement", "startAtJunction",
      "endAtJunction", "correspondToJunction",
      // Sensors
      "relatedToSensor", "hasRecord", "observeCarPark", "hasCarParkSensor", "hasPrediction",
      "refersToMunicipality", "hasWeatherReport", "formsTable", "placeOnRoad", "hasObservation",
      "measuredBySensor", "lastStop", "atBusStop", "concernLine", "hasForecast",
      // Temporal pairs: record -> instant and instant -> record
      "observationTime", "instantParking", "updateTime", "instantWReport", "measuredTime",
      "instantObserv", "hasExpectedTime", "instantForecast", "hasLastStopTime", "instantAVM",
      // Aggregates
      "aggregatedProperty",
  };
  for (const auto& p : object_props) {
    s.add_property(PropertyDef{p, vocab::km4c(p), PropertyKind::kObject});
  }
  s.add_property(PropertyDef{"lat", std::string(vocab::kGeoLat), PropertyKind::kData});
  s.add_property(PropertyDef{"long", std::string(vocab::kGeoLong), PropertyKind::kData});
  s.add_property(
      PropertyDef{"inXSDDateTime", std::string(vocab::kTimeInXsdDateTime), PropertyKind::kData});
  const std::vector<std::string> data_props = {
      "name", "alternativeName", "extendName", "number", "classCode", "streetAddress", "civic",
      "postalCode", "phone", "fax", "email", "url", "municipalityName", "istatCode", "ATECOcode",
      "kilometer", "code", "direction", "resolutionDate", "statisticValue",
      "freeParkingLots", "occupiedParkingLots", "vehicle", "delay", "value", "observationKind",
      "predictionDay", "predictionHour", "description", "minTemp", "maxTemp",
      "aggregatePeriod", "periodKey", "count", "sum", "mean", "min", "max",
      "sequence",
  };
  for (const auto& p : data_props) {
    s.add_property(PropertyDef{p, vocab::km4c(p), PropertyKind::kData});
  }
}

void add_classes(Schema& s) {
  auto add = [&s](std::string name, MC m, std::optional<std::string> parent,
                  std::vector<PropertyConstraint> cons = {}) {
    s.add_class(ClassDef{std::move(name), m, std::move(parent), std::move(cons)});
  };

  // Administration
  add("PA", MC::kAdministration, std::nullopt);
  add("Region", MC::kAdministration, "PA", {obj("hasProvince", "Province", 1, kMany)});
  add("Province", MC::kAdministration, "PA",
      {obj("hasMunicipality", "Municipality", 1, kMany, kWarn)});
  add("Municipality", MC::kAdministration, "PA",
      {obj("isPartOfProvince", "Province", 0, 1, kWarn)});
  add("Resolution", MC::kAdministration, std::nullopt,
      {obj("hasApprovedPA", "PA", 0, 1, kWarn)});
  add("StatisticalData", MC::kAdministration, std::nullopt);

  // Street guide
  add("Road", MC::kStreetGuide, std::nullopt,
      {obj("containsElement", "RoadElement", 1, kMany),
       obj("coincideWith", "AdministrativeRoad", 0, kMany),
       obj("inMunicipalityOf", "Municipality", 0, kMany)});
  add("RoadElement", MC::kStreetGuide, std::nullopt,
      {obj("startsAtNode", "Node", 1, 1), obj("endsAtNode", "Node", 1, 1),
       obj("managingAuthority", "PA", 0, 1, kWarn)});
  add("Node", MC::kStreetGuide, std::nullopt,
      {dat("lat", "decimal", 1, 1), dat("long", "decimal", 1, 1)});
  add("AdministrativeRoad", MC::kStreetGuide, std::nullopt,
      {obj("coincideWith", "Road", 0, kMany), obj("ownerAuthority", "PA", 0, 1, kWarn)});
  add("Milestone", MC::kStreetGuide, std::nullopt,
      {obj("isInElement", "AdministrativeRoad", 1, 1), dat("lat", "decimal", 0, 1),
       dat("long", "decimal", 0, 1)});
  add("StreetNumber", MC::kStreetGuide, std::nullopt,
      {obj("belongToRoad", "Road", 1, 1, kWarn), dat("number", "string", 1, 1, kWarn),
       PropertyConstraint{"classCode", PropertyKind::kData, "string", 0, 1, {"Red", "Black"}, kWarn}});
  add("Entry", MC::kStreetGuide, std::nullopt,
      {dat("lat", "decimal", 0, 1), dat("long", "decimal", 0, 1)});
  add("EntryRule", MC::kStreetGuide, std::nullopt,
      {obj("accessToElement", "RoadElement", 0, kMany)});
  add("Maneuver", MC::kStreetGuide, std::nullopt,
      {obj("hasFirstElem", "RoadElement", 0, 1), obj("hasSecondElem", "RoadElement", 0, 1),
       obj("hasThirdElem", "RoadElement", 0, 1), obj("concerningNode", "Node", 0, 1, kWarn)});
  add("Junction", MC::kStreetGuide, std::nullopt,
      {dat("lat", "decimal", 1, 1), dat("long", "decimal", 1, 1)});
  add("RoadLink", MC::kStreetGuide, std::nullopt,
      {obj("starting", "Junction", 1, 1), obj("ending", "Junction", 1, 1)});

  // Points of interest
  add("Service", MC::kPointOfInterest, std::nullopt,
      {obj("hasAccess", "Entry", 0, 1), obj("isInRoad", "Road", 0, kMany),
       obj("hasGRLocation", "Location", 0, kMany)});
  add("Accommodation", MC::kPointOfInterest, "Service",
      {PropertyConstraint{"serviceCategory", PropertyKind::kObject, "category", 1, kMany,
                          accommodation_categories(), Severity::kError}});
  for (const char* sub : {"GovernmentOffice", "TourismService", "TransferService",
                          "CulturalActivity", "FinancialService", "Shopping", "Healthcare",
                          "Education", "Entertainment", "Emergency", "WineAndFood"}) {
    add(sub, MC::kPointOfInterest, "Service");
  }

  // Local public transport
  add("Lot", MC::kLocalPublicTransport, std::nullopt);
  add("PublicTransportLine", MC::kLocalPublicTransport, std::nullopt,
      {obj("isPartOfLot", "Lot", 0, 1, kWarn)});
  add("Ride", MC::kLocalPublicTransport, std::nullopt,
      {obj("scheduledOnLine", "PublicTransportLine", 1, 1)});
  add("Route", MC::kLocalPublicTransport, std::nullopt,
      {obj("hasFirstSection", "RouteSection", 0, 1, kWarn),
       obj("hasFirstStop", "BusStop", 0, 1, kWarn)});
  add("RouteSection", MC::kLocalPublicTransport, std::nullopt,
      {obj("startsAtStop", "BusStop", 0, 1, kWarn), obj("endsAtStop", "BusStop", 0, 1, kWarn)});
  add("BusStop", MC::kLocalPublicTransport, std::nullopt,
      {dat("lat", "decimal", 1, 1), dat("long", "decimal", 1, 1)});
  add("RouteLink", MC::kLocalPublicTransport, std::nullopt,
      {obj("beginsAtJunction", "RouteJunction", 0, 1, kWarn),
       obj("finishesAtJunction", "RouteJunction", 0, 1, kWarn)});
  add("RouteJunction", MC::kLocalPublicTransport, std::nullopt,
      {dat("lat", "decimal", 0, 1, kWarn), dat("long", "decimal", 0, 1, kWarn)});
  add("RailwayLine", MC::kLocalPublicTransport, std::nullopt);
  add("RailwayDirection", MC::kLocalPublicTransport, std::nullopt);
  add("RailwaySection", MC::kLocalPublicTransport, std::nullopt);
  add("RailwayElement", MC::kLocalPublicTransport, std::nullopt,
      {obj("startAtJunction", "RailwayJunction", 1, 1),
       obj("endAtJunction", "RailwayJunction", 1, 1)});
  add("RailwayJunction", MC::kLocalPublicTransport, std::nullopt);
  add("TrainStation", MC::kLocalPublicTransport, std::nullopt,
      {obj("correspondToJunction", "RailwayJunction", 1, 1)});
  add("GoodsYard", MC::kLocalPublicTransport, std::nullopt,
      {obj("correspondToJunction", "RailwayJunction", 1, 1)});

  // Sensors
  add("CarParkSensor", MC::kSensors, std::nullopt,
      {obj("observeCarPark", "TransferService", 0, 1, kWarn)});
  add("SituationRecord", MC::kSensors, std::nullopt,
      {obj("relatedToSensor", "CarParkSensor", 1, 1, kWarn),
       obj("observationTime", "Instant", 1, 1)});
  add("WeatherReport", MC::kSensors, std::nullopt,
      {obj("refersToMunicipality", "Municipality", 0, 1, kWarn),
       obj("updateTime", "Instant", 1, 1)});
  add("WeatherPrediction", MC::kSensors, std::nullopt);
  add("SensorSiteTable", MC::kSensors, std::nullopt);
  add("SensorSite", MC::kSensors, std::nullopt,
      {obj("formsTable", "SensorSiteTable", 0, 1, kWarn), obj("placeOnRoad", "Road", 0, 1, kWarn)});
  add("Observation", MC::kSensors, std::nullopt,
      {obj("measuredBySensor", "SensorSite", 1, 1, kWarn), obj("measuredTime", "Instant", 1, 1)});
  for (const char* sub : {"TrafficConcentration", "TrafficHeadway", "TrafficSpeed", "TrafficFlow"}) {
    add(sub, MC::kSensors, "Observation");
  }
  add("AVMRecord", MC::kSensors, std::nullopt,
      {obj("lastStop", "BusStop", 0, 1), obj("concernLine", "PublicTransportLine", 0, 1, kWarn),
       obj("hasLastStopTime", "Instant", 1, 1)});
  add("BusStopForecast", MC::kSensors, std::nullopt,
      {obj("atBusStop", "BusStop", 1, 1), obj("hasExpectedTime", "Instant", 1, 1)});

  // Temporal
  add("Instant", MC::kTemporal, std::nullopt, {dat("inXSDDateTime", "dateTime", 1, 1)});

  // Metadata
  add("Dataset", MC::kMetadata, std::nullopt,
      {dat("name", "string", 1, 1, kWarn)});
}

}  // namespace

Schema build_schema() {
  Schema s;
  add_properties(s);
  add_classes(s);
  s.finalize();
  return s;
}

const Schema& load_schema() {
  static const Schema instance = build_schema();
  return instance;
}

std::string category_value(const Term& t) {
  if (t.is_literal()) return t.value();
  return percent_decode(vocab::local_name(t.value()));
}

namespace {

std::string infer_entity(std::span<const Quad> quads) {
  if (quads.empty()) return {};
  std::set<std::string> objects;
  for (const auto& q : quads) {
    if (q.object.is_iri()) objects.insert(q.object.value());
  }
  for (const auto& q : quads) {
    if (!objects.count(q.subject.str())) return q.subject.str();
  }
  return quads.front().subject.str();
}

}  // namespace

std::vector<ViolationReport> validate_entity(const Schema& schema, std::span<const Quad> quads,
                                             std::string_view root_class, std::string_view entity) {
  auto constraints = schema.effective_constraints(root_class);
  std::vector<ViolationReport> out;
  for (const auto& c : constraints) {
    const std::string& piri = schema.property_iri(c.property);
    int count = 0;
    std::vector<std::string> bad;
    for (const auto& q : quads) {
      if (q.subject.str() != entity || q.predicate.str() != piri) continue;
      ++count;
      if (!c.allowed_values.empty()) {
        std::string v = category_value(q.object);
        if (std::find(c.allowed_values.begin(), c.allowed_values.end(), v) == c.allowed_values.end()) {
          bad.push_back(v);
        }
      }
    }
    bool card_bad = count < c.min_card || (c.max_card && count > *c.max_card);
    if (card_bad) {
      out.push_back(ViolationReport{std::string(entity), c, count, c.severity, {}});
    }
    if (!bad.empty()) {
      out.push_back(ViolationReport{std::string(entity), c, static_cast<int>(bad.size()), c.severity,
                                    std::move(bad)});
    }
  }
  return out;
}

std::vector<ViolationReport> validate_entity(const Schema& schema, std::span<const Quad> quads,
                                             std::string_view root_class) {
  return validate_entity(schema, quads, root_class, infer_entity(quads));
}

std::string classify_service(const Schema& schema, std::string_view category) {
  for (const auto& c : schema.classes()) {
    if (c.name == "Service" || !schema.is_subclass_of(c.name, "Service")) continue;
    for (const auto& k : c.constraints) {
      if (k.property != "serviceCategory") continue;
      if (std::find(k.allowed_values.begin(), k.allowed_values.end(), category) !=
          k.allowed_values.end()) {
        return c.name;
      }
    }
  }
  return "Service";
}

bool is_known_service_category(const Schema& schema, std::string_view category) {
  return classify_service(schema, category) != "Service";
}

}  // namespace km4::schema

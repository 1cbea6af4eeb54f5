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

#include "km4/realtime.hpp"

#include <algorithm>

#include "km4/common.hpp"
#include "km4/schema.hpp"
#include "km4/time.hpp"
#include "km4/vocab.hpp"

namespace km4::realtime {

namespace {

using json = nlohmann::json;

constexpr std::pair<PayloadType, std::string_view> kTypes[] = {
    {PayloadType::kParking, "parking"},
    {PayloadType::kAvm, "avm"},
    {PayloadType::kWeather, "weather"},
    {PayloadType::kObservation, "observation"},
};

const char* kObservationKinds[] = {"TrafficConcentration", "TrafficHeadway", "TrafficSpeed", "TrafficFlow"};

[[noreturn]] void reject(const Payload& p, const std::string& why) {
  throw_error(ErrorCode::kInvalidArgument, std::string(to_string(p.type)) + " payload rejected: " + why);
}

std::string text_of(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

std::optional<std::string> member(const json& obj, const char* key) {
  if (!obj.is_object()) return std::nullopt;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  std::string s = trim(text_of(*it));
  if (s.empty()) return std::nullopt;
  return s;
}

std::string required(const Payload& p, const json& obj, const char* key) {
  auto v = member(obj, key);
  if (!v) reject(p, std::string("missing ") + key);
  return *v;
}

DateTime required_time(const Payload& p, const json& obj, const char* key) {
  auto v = member(obj, key);
  if (!v) reject(p, std::string("missing ") + key);
  auto dt = try_parse_datetime(*v);
  if (!dt) reject(p, std::string("malformed ") + key + " '" + *v + "'");
  return *dt;
}

Literal number_literal(const Payload& p, const std::string& v, const char* key) {
  if (Literal::is_valid(v, Datatype::kInteger)) return Literal{v, Datatype::kInteger};
  if (Literal::is_valid(v, Datatype::kDecimal)) return Literal{v, Datatype::kDecimal};
  reject(p, std::string("non-numeric ") + key + " '" + v + "'");
}

/// External identifiers pass through when already absolute IRIs.
Iri resource(std::string_view dataset_id, std::string_view role, const std::string& id) {
  if (id.find("://") != std::string::npos && Iri::is_valid(id)) return Iri(id);
  return Iri(ingest::mint_iri(dataset_id, role, {id}));
}

struct Emitter {
  const Iri& ctx;
  Iri instants_ctx;
  std::vector<Quad> out;

  void type(const Iri& s, std::string_view cls) {
    out.push_back(Quad{s, Iri(std::string(vocab::kRdfType)), Term(Iri(vocab::km4c(cls))), ctx});
  }
  void link(const Iri& s, std::string_view prop, const Iri& o) {
    out.push_back(Quad{s, Iri(vocab::km4c(prop)), Term(o), ctx});
  }
  void lit(const Iri& s, std::string_view prop, Literal l) {
    out.push_back(Quad{s, Iri(vocab::km4c(prop)), Term(std::move(l)), ctx});
  }
  void geo(const Iri& s, const std::string& lat, const std::string& lon) {
    out.push_back(Quad{s, Iri(std::string(vocab::kGeoLat)), Term(Literal{lat, Datatype::kDecimal}), ctx});
    out.push_back(Quad{s, Iri(std::string(vocab::kGeoLong)), Term(Literal{lon, Datatype::kDecimal}), ctx});
  }
  /// Instant for (owner resource, time), linked both ways.
  Iri instant(std::string_view dataset_id, const std::string& owner, const DateTime& t, const Iri& record,
              std::string_view forward, std::string_view backward) {
    Iri i(ingest::mint_iri(dataset_id, "instant", {owner, compact_utc_stamp(t)}));
    out.push_back(Quad{i, Iri(std::string(vocab::kRdfType)), Term(Iri(vocab::km4c("Instant"))), instants_ctx});
    out.push_back(Quad{i, Iri(std::string(vocab::kTimeInXsdDateTime)),
                       Term(Literal{format_datetime(t), Datatype::kDateTime}), instants_ctx});
    out.push_back(Quad{i, Iri(vocab::km4c(backward)), Term(record), instants_ctx});
    link(record, forward, i);
    return i;
  }
};

}  // namespace

std::string_view to_string(PayloadType t) {
  for (const auto& [k, n] : kTypes) {
    if (k == t) return n;
  }
  return "";
}

std::optional<PayloadType> payload_type_from_string(std::string_view s) {
  std::string lower = to_lower_ascii(trim(s));
  for (const auto& [k, n] : kTypes) {
    if (n == lower) return k;
  }
  return std::nullopt;
}

std::vector<Payload> parse_payloads(std::string_view text, std::optional<PayloadType> forced) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_error(ErrorCode::kParse, std::string("feed payload: ") + e.what());
  }
  std::vector<json> items;
  if (doc.is_array()) {
    items.assign(doc.begin(), doc.end());
  } else {
    items.push_back(doc);
  }
  std::vector<Payload> out;
  for (size_t i = 0; i < items.size(); ++i) {
    const json& obj = items[i];
    std::string where = "feed payload " + std::to_string(i + 1) + ": ";
    if (!obj.is_object()) throw_error(ErrorCode::kParse, where + "not a JSON object");
    Payload p;
    p.body = obj;
    if (forced) {
      p.type = *forced;
    } else {
      auto t = member(obj, "type");
      if (!t) throw_error(ErrorCode::kParse, where + "missing type");
      auto pt = payload_type_from_string(*t);
      if (!pt) throw_error(ErrorCode::kParse, where + "unknown type '" + *t + "'");
      p.type = *pt;
    }
    out.push_back(std::move(p));
  }
  return out;
}

ingest::FieldMap payload_fields(const Payload& p) {
  return {{"type", std::string(to_string(p.type))}, {"payload", p.body.dump()}};
}

Payload payload_from_fields(const ingest::FieldMap& fields) {
  const std::string* t = ingest::find_field(fields, "type");
  const std::string* body = ingest::find_field(fields, "payload");
  if (!t || !body) throw_error(ErrorCode::kParse, "staged feed record lacks type or payload");
  auto pt = payload_type_from_string(*t);
  if (!pt) throw_error(ErrorCode::kParse, "staged feed record has unknown type " + *t);
  auto items = parse_payloads(*body, pt);
  return items.front();
}

std::string payload_key(const Payload& p) {
  const char* owner = "";
  switch (p.type) {
    case PayloadType::kParking: owner = "carPark"; break;
    case PayloadType::kAvm: owner = "vehicle"; break;
    case PayloadType::kWeather: owner = "municipality"; break;
    case PayloadType::kObservation: owner = "sensor"; break;
  }
  return std::string(to_string(p.type)) + "|" + member(p.body, owner).value_or("") + "|" +
         member(p.body, "timestamp").value_or("");
}

std::string instants_context(std::string_view data_context) {
  return std::string(data_context) + "/instants";
}

std::vector<Quad> ingest_realtime(const Payload& p, std::string_view ds, const Iri& context) {
  Emitter e{context, Iri(instants_context(context.str())), {}};
  const json& b = p.body;
  DateTime t = required_time(p, b, "timestamp");
  std::string stamp = compact_utc_stamp(t);

  switch (p.type) {
    case PayloadType::kParking: {
      std::string park = required(p, b, "carPark");
      Iri sensor = resource(ds, "carpark", park);
      Iri rec(ingest::mint_iri(ds, "situation", {park, stamp}));
      e.type(sensor, "CarParkSensor");
      e.type(rec, "SituationRecord");
      e.link(rec, "relatedToSensor", sensor);
      e.lit(rec, "freeParkingLots", number_literal(p, required(p, b, "free"), "free"));
      e.lit(rec, "occupiedParkingLots", number_literal(p, required(p, b, "occupied"), "occupied"));
      e.instant(ds, "carpark/" + park, t, rec, "observationTime", "instantParking");
      break;
    }
    case PayloadType::kAvm: {
      std::string vehicle = required(p, b, "vehicle");
      Iri rec(ingest::mint_iri(ds, "avm", {vehicle, stamp}));
      e.type(rec, "AVMRecord");
      e.lit(rec, "vehicle", Literal{vehicle, Datatype::kString});
      if (auto d = member(b, "delay")) e.lit(rec, "delay", number_literal(p, *d, "delay"));
      if (auto line = member(b, "line")) e.link(rec, "concernLine", resource(ds, "line", *line));
      if (auto stop = member(b, "lastStop")) e.link(rec, "lastStop", resource(ds, "stop", *stop));
      auto lat = member(b, "lat");
      auto lon = member(b, "long");
      if (lat && lon) {
        if (!Literal::is_valid(*lat, Datatype::kDecimal) || !Literal::is_valid(*lon, Datatype::kDecimal)) {
          reject(p, "malformed coordinates");
        }
        e.geo(rec, *lat, *lon);
      }
      e.instant(ds, "vehicle/" + vehicle, t, rec, "hasLastStopTime", "instantAVM");
      if (auto it = b.find("stops"); it != b.end() && it->is_array()) {
        for (const auto& s : *it) {
          std::string stop = required(p, s, "stop");
          DateTime expected = required_time(p, s, "time");
          Iri fc(ingest::mint_iri(ds, "forecast", {vehicle, stamp, stop}));
          e.type(fc, "BusStopForecast");
          e.link(fc, "atBusStop", resource(ds, "stop", stop));
          e.link(rec, "hasForecast", fc);
          e.instant(ds, "forecast/" + vehicle + "/" + stamp + "/" + stop, expected, fc, "hasExpectedTime",
                    "instantForecast");
        }
      }
      break;
    }
    case PayloadType::kWeather: {
      std::string muni = required(p, b, "municipality");
      Iri rec(ingest::mint_iri(ds, "weather", {muni, stamp}));
      e.type(rec, "WeatherReport");
      e.lit(rec, "municipalityName", Literal{muni, Datatype::kString});
      if (auto code = member(b, "istatCode")) {
        e.lit(rec, "istatCode", Literal{*code, Datatype::kString});
        e.link(rec, "refersToMunicipality", Iri(municipality_iri(*code)));
      }
      e.instant(ds, "weather/" + muni, t, rec, "updateTime", "instantWReport");
      if (auto it = b.find("predictions"); it != b.end() && it->is_array()) {
        size_t n = 0;
        for (const auto& pr : *it) {
          Iri pi(ingest::mint_iri(ds, "prediction", {muni, stamp, std::to_string(++n)}));
          e.type(pi, "WeatherPrediction");
          e.link(rec, "hasPrediction", pi);
          if (auto v = member(pr, "day")) e.lit(pi, "predictionDay", Literal{*v, Datatype::kString});
          if (auto v = member(pr, "hour")) e.lit(pi, "predictionHour", Literal{*v, Datatype::kString});
          if (auto v = member(pr, "description")) e.lit(pi, "description", Literal{*v, Datatype::kString});
          if (auto v = member(pr, "minTemp")) e.lit(pi, "minTemp", number_literal(p, *v, "minTemp"));
          if (auto v = member(pr, "maxTemp")) e.lit(pi, "maxTemp", number_literal(p, *v, "maxTemp"));
        }
      }
      break;
    }
    case PayloadType::kObservation: {
      std::string sensor_id = required(p, b, "sensor");
      std::string kind = member(b, "kind").value_or("Observation");
      bool known = kind == "Observation" ||
                   std::any_of(std::begin(kObservationKinds), std::end(kObservationKinds),
                               [&](const char* k) { return kind == k; });
      if (!known) reject(p, "unknown observation kind '" + kind + "'");
      Iri sensor = resource(ds, "sensor", sensor_id);
      Iri rec(ingest::mint_iri(ds, "observation", {sensor_id, stamp}));
      e.type(sensor, "SensorSite");
      e.type(rec, kind);
      e.link(rec, "measuredBySensor", sensor);
      e.lit(rec, "value", number_literal(p, required(p, b, "value"), "value"));
      e.instant(ds, "sensor/" + sensor_id, t, rec, "measuredTime", "instantObserv");
      break;
    }
  }
  std::sort(e.out.begin(), e.out.end());
  e.out.erase(std::unique(e.out.begin(), e.out.end()), e.out.end());
  return std::move(e.out);
}

IstatCompletion complete_weather_istat(const Payload& report, const ingest::IstatTable& table) {
  IstatCompletion out{report, false, {}};
  if (report.type != PayloadType::kWeather) {
    throw_error(ErrorCode::kInvalidArgument, "ISTAT completion applies to weather payloads only");
  }
  auto muni = member(report.body, "municipality");
  if (!muni) {
    out.flagged = true;
    out.note = "weather report without municipality";
    return out;
  }
  auto code = table.lookup(*muni);
  if (!code) {
    out.flagged = true;
    out.note = "unknown municipality '" + *muni + "': review";
    return out;
  }
  out.payload.body["istatCode"] = *code;
  return out;
}

std::string municipality_iri(std::string_view istat_code) {
  return std::string(vocab::kResourceBase) + "/municipality/" + percent_encode(istat_code);
}

}  // namespace km4::realtime

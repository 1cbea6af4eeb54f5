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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "km4/ingestion.hpp"
#include "km4/quad.hpp"

namespace km4::realtime {

enum class PayloadType { kParking, kAvm, kWeather, kObservation };

std::string_view to_string(PayloadType t);
std::optional<PayloadType> payload_type_from_string(std::string_view s);

/// A feed record. `body` is the JSON object as received.
///
/// parking:     carPark, timestamp, free, occupied
/// avm:         vehicle, line, timestamp, lastStop, delay, [lat, long],
///              stops: [{stop, time}]
/// weather:     municipality, [istatCode], timestamp,
///              predictions: [{day, hour, description, minTemp, maxTemp}]
/// observation: sensor, kind, timestamp, value
struct Payload {
  PayloadType type = PayloadType::kParking;
  nlohmann::json body;
};

/// Accepts one object or an array of objects. Each object carries its type
/// in a "type" member unless `forced` is given. Throws Error(kParse).
std::vector<Payload> parse_payloads(std::string_view text,
                                    std::optional<PayloadType> forced = std::nullopt);

/// Staged form: "type" and the verbatim "payload" JSON.
ingest::FieldMap payload_fields(const Payload& p);
Payload payload_from_fields(const ingest::FieldMap& fields);
/// Stable per (resource, timestamp).
std::string payload_key(const Payload& p);

/// Companion context holding the instants minted for a realtime context.
std::string instants_context(std::string_view data_context);

/// Throws Error(kInvalidArgument) when the timestamp (or another required
/// member) is missing or malformed.
std::vector<Quad> ingest_realtime(const Payload& p, std::string_view dataset_id, const Iri& context);

struct IstatCompletion {
  Payload payload;
  bool flagged = false;
  std::string note;
};

/// Fills istatCode from the municipality name. Unknown names are flagged
/// and the payload is returned otherwise unchanged.
IstatCompletion complete_weather_istat(const Payload& report, const ingest::IstatTable& table);

std::string municipality_iri(std::string_view istat_code);

}  // namespace km4::realtime

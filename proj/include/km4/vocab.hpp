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

#include <string>
#include <string_view>

// Namespace IRIs used when emitting quads.
namespace km4::vocab {

inline constexpr std::string_view kKm4c = "http://www.disit.org/km4city/schema#";
inline constexpr std::string_view kMeta = "http://www.disit.org/km4city/meta#";
inline constexpr std::string_view kResourceBase = "http://www.disit.org/km4city/resource";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kOwlSameAs = "http://www.w3.org/2002/07/owl#sameAs";
inline constexpr std::string_view kGeo = "http://www.w3.org/2003/01/geo/wgs84_pos#";
inline constexpr std::string_view kGeoLat = "http://www.w3.org/2003/01/geo/wgs84_pos#lat";
inline constexpr std::string_view kGeoLong = "http://www.w3.org/2003/01/geo/wgs84_pos#long";
inline constexpr std::string_view kTime = "http://www.w3.org/2006/time#";
inline constexpr std::string_view kTimeInstant = "http://www.w3.org/2006/time#Instant";
inline constexpr std::string_view kTimeInXsdDateTime = "http://www.w3.org/2006/time#inXSDDateTime";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline constexpr std::string_view kMetadataContext = "urn:km4:context:metadata";
inline constexpr std::string_view kReconciliationContext = "urn:km4:context:reconciliation";

inline std::string km4c(std::string_view local) {
  return std::string(kKm4c) + std::string(local);
}

inline std::string meta(std::string_view local) {
  return std::string(kMeta) + std::string(local);
}

/// Text after the last '#' or '/', the conventional local name of an IRI.
inline std::string_view local_name(std::string_view iri) {
  auto pos = iri.find_last_of("#/");
  return pos == std::string_view::npos ? iri : iri.substr(pos + 1);
}

}  // namespace km4::vocab

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

#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

namespace km4::geo {

// IUGG mean Earth radius, meters.
inline constexpr double kEarthRadiusMeters = 6371008.8;
inline constexpr double kCellDegrees = 0.01;

struct GeoPoint {
  double lat = 0;
  double lon = 0;

  static bool is_valid(double lat, double lon);
  /// Throws Error(kInvalidArgument) when out of WGS84 bounds.
  static GeoPoint make(double lat, double lon);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance using the haversine formula.
double haversine_meters(const GeoPoint& a, const GeoPoint& b);

struct Neighbor {
  uint32_t id = 0;
  double distance = 0;
};

/// Fixed-grid bucketing (0.01 degree cells). Queries expand rings of cells
/// around the query cell and stop once no unvisited cell can hold a point
/// closer than the current k-th result; candidate distances are always
/// computed exactly, so results equal a full scan.
class GridIndex {
 public:
  void upsert(uint32_t id, GeoPoint p);
  void erase(uint32_t id);
  size_t size() const { return points_.size(); }
  std::optional<GeoPoint> position(uint32_t id) const;

  /// Up to k ids within max_distance (inclusive), ascending by distance.
  /// Equal distances are left for the caller to order; the returned set is
  /// exact including every point tied with the k-th distance.
  std::vector<Neighbor> nearest(GeoPoint q, size_t k,
                                double max_distance = std::numeric_limits<double>::infinity()) const;

 private:
  using CellKey = int64_t;
  static int32_t lat_cell(double lat);
  static int32_t lon_cell(double lon);
  static CellKey key(int32_t i, int32_t j) {
    return (static_cast<int64_t>(i) << 32) ^ static_cast<uint32_t>(j);
  }

  std::unordered_map<uint32_t, GeoPoint> points_;
  std::unordered_map<CellKey, std::vector<uint32_t>> cells_;
};

}  // namespace km4::geo

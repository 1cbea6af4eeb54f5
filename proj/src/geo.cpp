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

#include "km4/geo.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "km4/common.hpp"

namespace km4::geo {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr int32_t kLonCells = 36000;  // 360 / kCellDegrees
constexpr int32_t kMinLatCell = -9000;
constexpr int32_t kMaxLatCell = 9000;

int32_t wrap_lon_cell(int64_t j) {
  int64_t m = (j + kLonCells / 2) % kLonCells;
  if (m < 0) m += kLonCells;
  return static_cast<int32_t>(m - kLonCells / 2);
}

int32_t circular_gap(int32_t a, int32_t b) {
  int32_t d = std::abs(a - b) % kLonCells;
  return std::min(d, kLonCells - d);
}

}  // namespace

bool GeoPoint::is_valid(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
         lon <= 180.0;
}

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!is_valid(lat, lon)) {
    throw_error(ErrorCode::kInvalidArgument, "coordinates out of range: lat=" + format_double(lat) +
                                                 " long=" + format_double(lon));
  }
  return GeoPoint{lat, lon};
}

double haversine_meters(const GeoPoint& a, const GeoPoint& b) {
  double phi1 = a.lat * kDegToRad;
  double phi2 = b.lat * kDegToRad;
  double dphi = (b.lat - a.lat) * kDegToRad;
  double dlambda = (b.lon - a.lon) * kDegToRad;
  double s1 = std::sin(dphi / 2);
  double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

int32_t GridIndex::lat_cell(double lat) {
  return static_cast<int32_t>(std::floor(lat / kCellDegrees));
}

int32_t GridIndex::lon_cell(double lon) {
  return wrap_lon_cell(static_cast<int64_t>(std::floor(lon / kCellDegrees)));
}

void GridIndex::upsert(uint32_t id, GeoPoint p) {
  erase(id);
  points_[id] = p;
  cells_[key(lat_cell(p.lat), lon_cell(p.lon))].push_back(id);
}

void GridIndex::erase(uint32_t id) {
  auto it = points_.find(id);
  if (it == points_.end()) return;
  CellKey k = key(lat_cell(it->second.lat), lon_cell(it->second.lon));
  auto cit = cells_.find(k);
  if (cit != cells_.end()) {
    auto& v = cit->second;
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
    if (v.empty()) cells_.erase(cit);
  }
  points_.erase(it);
}

std::optional<GeoPoint> GridIndex::position(uint32_t id) const {
  auto it = points_.find(id);
  if (it == points_.end()) return std::nullopt;
  return it->second;
}

std::vector<Neighbor> GridIndex::nearest(GeoPoint q, size_t k, double max_distance) const {
  std::vector<Neighbor> found;
  if (k == 0 || points_.empty()) return found;

  // Max-heap over the k smallest distances seen so far.
  std::priority_queue<double> kbest;
  auto consider_cell = [&](const std::vector<uint32_t>& ids) {
    for (uint32_t id : ids) {
      double d = haversine_meters(q, points_.at(id));
      if (d > max_distance) continue;
      found.push_back(Neighbor{id, d});
      if (kbest.size() < k) {
        kbest.push(d);
      } else if (d < kbest.top()) {
        kbest.pop();
        kbest.push(d);
      }
    }
  };

  const int32_t qi = lat_cell(q.lat);
  const int32_t qj = lon_cell(q.lon);
  const double cos_phi = std::cos(q.lat * kDegToRad);

  // Lower bound on the distance to any point outside the square of cells
  // within Chebyshev radius r of the query cell.
  auto outside_bound = [&](int32_t r) {
    double bound = std::numeric_limits<double>::infinity();
    int32_t lo_i = qi - r;
    int32_t hi_i = qi + r + 1;
    if (lo_i > kMinLatCell) {
      double gap = q.lat - lo_i * kCellDegrees;
      bound = std::min(bound, std::max(gap, 0.0) * kDegToRad * kEarthRadiusMeters);
    }
    if (hi_i <= kMaxLatCell) {
      double gap = hi_i * kCellDegrees - q.lat;
      bound = std::min(bound, std::max(gap, 0.0) * kDegToRad * kEarthRadiusMeters);
    }
    if (2 * r + 1 < kLonCells) {
      double lon_in_cell = q.lon - std::floor(q.lon / kCellDegrees) * kCellDegrees;
      double gap_deg = std::min(lon_in_cell + r * kCellDegrees, (r + 1) * kCellDegrees - lon_in_cell);
      gap_deg = std::clamp(gap_deg, 0.0, 90.0);
      double lon_bound = kEarthRadiusMeters * std::asin(std::clamp(cos_phi * std::sin(gap_deg * kDegToRad), 0.0, 1.0));
      bound = std::min(bound, lon_bound);
    }
    // Conservative slack for rounding in the bound itself.
    return bound * (1.0 - 1e-12) - 1e-6;
  };

  auto done = [&](int32_t r) {
    double bound = outside_bound(r);
    if (bound > max_distance) return true;
    return kbest.size() >= k && bound > kbest.top();
  };

  int32_t r = 0;
  while (true) {
    // Visit ring r.
    for (int32_t di = -r; di <= r; ++di) {
      int32_t i = qi + di;
      if (i < kMinLatCell || i > kMaxLatCell) continue;
      bool edge_row = (di == -r || di == r);
      for (int32_t dj = -r; dj <= r; dj += (edge_row ? 1 : 2 * r)) {
        auto it = cells_.find(key(i, wrap_lon_cell(static_cast<int64_t>(qj) + dj)));
        if (it != cells_.end()) consider_cell(it->second);
        if (r == 0) break;
      }
    }
    if (done(r)) break;
    int32_t next = r + 1;
    bool ring_too_big = static_cast<size_t>(8) * static_cast<size_t>(next) > cells_.size() ||
                        2 * next + 1 >= kLonCells;
    if (ring_too_big) {
      // Fewer occupied cells than the next ring: finish by scanning them.
      for (const auto& [ck, ids] : cells_) {
        int32_t i = static_cast<int32_t>(ck >> 32);
        int32_t j = static_cast<int32_t>(static_cast<uint32_t>(ck & 0xffffffff));
        if (std::abs(i - qi) <= r && circular_gap(j, qj) <= r) continue;
        consider_cell(ids);
      }
      break;
    }
    r = next;
  }

  std::sort(found.begin(), found.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  if (found.size() > k) {
    double cutoff = found[k - 1].distance;
    size_t end = k;
    while (end < found.size() && found[end].distance <= cutoff) ++end;
    found.resize(end);
  }
  return found;
}

}  // namespace km4::geo

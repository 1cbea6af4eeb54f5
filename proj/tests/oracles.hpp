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

// Reference implementations written independently of the library, used to
// cross-check it. They favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace km4::oracle {

/// Full-matrix edit distance.
inline size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<size_t>> d(a.size() + 1, std::vector<size_t>(b.size() + 1));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

inline double levenshtein_similarity(const std::string& a, const std::string& b) {
  size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

inline double dice(const std::string& a, const std::string& b) {
  std::set<std::string> x, y;
  for (size_t i = 0; i + 1 < a.size(); ++i) x.insert(a.substr(i, 2));
  for (size_t i = 0; i + 1 < b.size(); ++i) y.insert(b.substr(i, 2));
  if (x.empty() && y.empty()) return a == b ? 1.0 : 0.0;
  if (x.empty() || y.empty()) return a == b ? 1.0 : 0.0;
  size_t common = 0;
  for (const auto& g : x) common += y.count(g);
  return 2.0 * static_cast<double>(common) / static_cast<double>(x.size() + y.size());
}

inline double jaccard(const std::string& a, const std::string& b) {
  std::set<std::string> x, y;
  std::istringstream sa(a), sb(b);
  for (std::string t; sa >> t;) x.insert(t);
  for (std::string t; sb >> t;) y.insert(t);
  if (x.empty() && y.empty()) return 1.0;
  std::set<std::string> all = x;
  all.insert(y.begin(), y.end());
  size_t common = 0;
  for (const auto& t : x) common += y.count(t);
  return static_cast<double>(common) / static_cast<double>(all.size());
}

inline double haversine(double lat1, double lon1, double lat2, double lon2) {
  const double r = 6371008.8;
  const double rad = M_PI / 180.0;
  double dlat = (lat2 - lat1) * rad;
  double dlon = (lon2 - lon1) * rad;
  double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * r * std::asin(std::min(1.0, std::sqrt(s)));
}

/// Connected components of an undirected graph by repeated BFS; each class
/// sorted, keyed by its smallest member.
inline std::map<int, std::vector<int>> components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (auto [a, b] : edges) {
    adj[static_cast<size_t>(a)].push_back(b);
    adj[static_cast<size_t>(b)].push_back(a);
  }
  std::vector<bool> seen(static_cast<size_t>(n));
  std::map<int, std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[static_cast<size_t>(s)]) continue;
    std::vector<int> comp{s};
    seen[static_cast<size_t>(s)] = true;
    for (size_t i = 0; i < comp.size(); ++i) {
      for (int t : adj[static_cast<size_t>(comp[i])]) {
        if (!seen[static_cast<size_t>(t)]) {
          seen[static_cast<size_t>(t)] = true;
          comp.push_back(t);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.emplace(comp.front(), comp);
  }
  return out;
}

/// Proleptic Gregorian days since 1970-01-01 (Howard Hinnant's algorithm).
inline long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

/// ISO-8601 week key ("2015-W09") of a calendar date.
inline std::string iso_week(long y, unsigned m, unsigned d) {
  long days = days_from_civil(y, m, d);
  int wd = static_cast<int>(((days % 7) + 7 + 3) % 7) + 1;  // 1970-01-01 was a Thursday; Monday = 1
  long thursday = days + (4 - wd);
  // Year of the Thursday: search around y.
  long year = y;
  if (thursday < days_from_civil(y, 1, 1)) year = y - 1;
  if (thursday >= days_from_civil(y + 1, 1, 1)) year = y + 1;
  long week = (thursday - days_from_civil(year, 1, 1)) / 7 + 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04ld-W%02ld", year, week);
  return buf;
}

}  // namespace km4::oracle

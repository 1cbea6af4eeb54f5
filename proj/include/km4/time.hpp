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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace km4 {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

/// An instant at millisecond precision plus the UTC offset it was written
/// with. Values without an explicit zone are treated as UTC.
struct DateTime {
  TimePoint instant{};
  int offset_minutes = 0;

  friend bool operator==(const DateTime& a, const DateTime& b) {
    return a.instant == b.instant;
  }
  friend auto operator<=>(const DateTime& a, const DateTime& b) {
    return a.instant <=> b.instant;
  }
};

/// Accepts `YYYY-MM-DD` and `YYYY-MM-DDThh:mm[:ss[.fff]][Z|±hh:mm]`.
std::optional<DateTime> try_parse_datetime(std::string_view text);
DateTime parse_datetime(std::string_view text);

/// `YYYY-MM-DDThh:mm:ss.fff` followed by `Z` or `±hh:mm`.
std::string format_datetime(const DateTime& dt);

/// Compact `YYYYMMDDThhmmssfffZ` form in UTC, safe for IRI path segments.
std::string compact_utc_stamp(const DateTime& dt);

/// Calendar-aware span: whole months plus a fixed number of milliseconds.
struct Duration {
  int months = 0;
  std::chrono::milliseconds fixed{0};

  friend bool operator==(const Duration&, const Duration&) = default;
};

/// Accepts ISO-8601 (`P2M`, `PT12H`, `P1DT6H`) or shorthand (`5min`, `12h`,
/// `2mo`, `1d`, `1w`, `30s`, `1y`).
std::optional<Duration> try_parse_duration(std::string_view text);
Duration parse_duration(std::string_view text);
std::string format_duration(const Duration& d);

/// Upper bound used for comparisons (months counted as 31 days).
std::chrono::milliseconds max_length(const Duration& d);

TimePoint add(TimePoint t, const Duration& d);
TimePoint subtract(TimePoint t, const Duration& d);

// Calendar bucket keys computed in a fixed local UTC offset.
std::string day_key(TimePoint t, int offset_minutes);    // 2015-03-01
std::string iso_week_key(TimePoint t, int offset_minutes);  // 2015-W09
std::string month_key(TimePoint t, int offset_minutes);  // 2015-03

}  // namespace km4

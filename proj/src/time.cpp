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

#include "km4/time.hpp"

#include <cstdio>

#include "km4/common.hpp"

namespace km4 {

using namespace std::chrono;

namespace {

bool read_digits(std::string_view s, size_t& pos, size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (size_t i = 0; i < n; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  pos += n;
  return true;
}

bool expect(std::string_view s, size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

sys_days civil_day(TimePoint t, int offset_minutes) {
  return floor<days>(t + minutes(offset_minutes));
}

}  // namespace

std::optional<DateTime> try_parse_datetime(std::string_view text) {
  std::string_view s = text;
  size_t pos = 0;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (!read_digits(s, pos, 4, y) || !expect(s, pos, '-') || !read_digits(s, pos, 2, mo) ||
      !expect(s, pos, '-') || !read_digits(s, pos, 2, d)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  int offset = 0;
  if (pos < s.size()) {
    if (!expect(s, pos, 'T')) return std::nullopt;
    if (!read_digits(s, pos, 2, h) || !expect(s, pos, ':') || !read_digits(s, pos, 2, mi)) {
      return std::nullopt;
    }
    if (expect(s, pos, ':')) {
      if (!read_digits(s, pos, 2, sec)) return std::nullopt;
      if (expect(s, pos, '.')) {
        size_t start = pos;
        int frac = 0;
        int scale = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
          if (scale < 3) {
            frac = frac * 10 + (s[pos] - '0');
            ++scale;
          }
          ++pos;
        }
        if (pos == start) return std::nullopt;
        while (scale < 3) {
          frac *= 10;
          ++scale;
        }
        ms = frac;
      }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    if (pos < s.size()) {
      if (expect(s, pos, 'Z')) {
        offset = 0;
      } else if (s[pos] == '+' || s[pos] == '-') {
        int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh = 0, om = 0;
        if (!read_digits(s, pos, 2, oh)) return std::nullopt;
        expect(s, pos, ':');
        if (!read_digits(s, pos, 2, om)) return std::nullopt;
        if (oh > 14 || om > 59) return std::nullopt;
        offset = sign * (oh * 60 + om);
      } else {
        return std::nullopt;
      }
    }
    if (pos != s.size()) return std::nullopt;
  }
  auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
  DateTime dt;
  dt.instant = time_point_cast<milliseconds>(local - minutes{offset});
  dt.offset_minutes = offset;
  return dt;
}

DateTime parse_datetime(std::string_view text) {
  auto dt = try_parse_datetime(text);
  if (!dt) throw_error(ErrorCode::kParse, "invalid dateTime: '" + std::string(text) + "'");
  return *dt;
}

std::string format_datetime(const DateTime& dt) {
  auto local = dt.instant + minutes{dt.offset_minutes};
  auto dp = floor<days>(local);
  year_month_day ymd{dp};
  hh_mm_ss<milliseconds> tod{local - dp};
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  std::string out(buf);
  if (dt.offset_minutes == 0) {
    out += 'Z';
  } else {
    int off = dt.offset_minutes;
    char sign = off < 0 ? '-' : '+';
    if (off < 0) off = -off;
    std::snprintf(buf, sizeof(buf), "%c%02d:%02d", sign, off / 60, off % 60);
    out += buf;
  }
  return out;
}

std::string compact_utc_stamp(const DateTime& dt) {
  auto dp = floor<days>(dt.instant);
  year_month_day ymd{dp};
  hh_mm_ss<milliseconds> tod{dt.instant - dp};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d%02u%02uT%02d%02d%02d%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
  return buf;
}

std::optional<Duration> try_parse_duration(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  Duration d;
  if (s[0] == 'P') {
    size_t pos = 1;
    bool in_time = false;
    bool any = false;
    while (pos < s.size()) {
      if (s[pos] == 'T') {
        in_time = true;
        ++pos;
        continue;
      }
      size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start || pos >= s.size()) return std::nullopt;
      long long n = std::stoll(s.substr(start, pos - start));
      char unit = s[pos++];
      any = true;
      if (!in_time) {
        switch (unit) {
          case 'Y': d.months += static_cast<int>(12 * n); break;
          case 'M': d.months += static_cast<int>(n); break;
          case 'W': d.fixed += days{7 * n}; break;
          case 'D': d.fixed += days{n}; break;
          default: return std::nullopt;
        }
      } else {
        switch (unit) {
          case 'H': d.fixed += hours{n}; break;
          case 'M': d.fixed += minutes{n}; break;
          case 'S': d.fixed += seconds{n}; break;
          default: return std::nullopt;
        }
      }
    }
    if (!any) return std::nullopt;
    return d;
  }
  size_t pos = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  if (pos == 0) return std::nullopt;
  long long n = std::stoll(s.substr(0, pos));
  std::string unit = to_lower_ascii(trim(s.substr(pos)));
  if (unit == "ms") {
    d.fixed = milliseconds{n};
  } else if (unit == "s" || unit == "sec") {
    d.fixed = seconds{n};
  } else if (unit == "min" || unit == "m") {
    d.fixed = minutes{n};
  } else if (unit == "h") {
    d.fixed = hours{n};
  } else if (unit == "d") {
    d.fixed = days{n};
  } else if (unit == "w") {
    d.fixed = days{7 * n};
  } else if (unit == "mo" || unit == "months" || unit == "month") {
    d.months = static_cast<int>(n);
  } else if (unit == "y") {
    d.months = static_cast<int>(12 * n);
  } else {
    return std::nullopt;
  }
  return d;
}

Duration parse_duration(std::string_view text) {
  auto d = try_parse_duration(text);
  if (!d) throw_error(ErrorCode::kParse, "invalid duration: '" + std::string(text) + "'");
  return *d;
}

std::string format_duration(const Duration& d) {
  std::string out = "P";
  if (d.months) out += std::to_string(d.months) + "M";
  auto ms = d.fixed.count();
  long long day_ms = 86'400'000LL;
  if (ms >= day_ms) {
    out += std::to_string(ms / day_ms) + "D";
    ms %= day_ms;
  }
  if (ms > 0) {
    out += "T";
    if (ms >= 3'600'000) {
      out += std::to_string(ms / 3'600'000) + "H";
      ms %= 3'600'000;
    }
    if (ms >= 60'000) {
      out += std::to_string(ms / 60'000) + "M";
      ms %= 60'000;
    }
    if (ms > 0) {
      if (ms % 1000 == 0) {
        out += std::to_string(ms / 1000) + "S";
      } else {
        out += format_double(static_cast<double>(ms) / 1000.0) + "S";
      }
    }
  }
  if (out == "P") out = "PT0S";
  return out;
}

std::chrono::milliseconds max_length(const Duration& d) {
  return d.fixed + duration_cast<milliseconds>(days{31} * d.months);
}

namespace {

TimePoint add_months(TimePoint t, int months) {
  if (months == 0) return t;
  auto dp = floor<days>(t);
  auto tod = t - dp;
  year_month_day ymd{dp};
  year_month ym = year_month{ymd.year(), ymd.month()} + std::chrono::months{months};
  auto last = year_month_day_last{ym.year(), month_day_last{ym.month()}}.day();
  auto dd = ymd.day() > last ? last : ymd.day();
  return sys_days{year_month_day{ym.year(), ym.month(), dd}} + tod;
}

}  // namespace

TimePoint add(TimePoint t, const Duration& d) {
  return add_months(t, d.months) + d.fixed;
}

TimePoint subtract(TimePoint t, const Duration& d) {
  return add_months(t, -d.months) - d.fixed;
}

std::string day_key(TimePoint t, int offset_minutes) {
  year_month_day ymd{civil_day(t, offset_minutes)};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string iso_week_key(TimePoint t, int offset_minutes) {
  sys_days d = civil_day(t, offset_minutes);
  unsigned iso_wd = weekday{d}.iso_encoding();  // Mon=1 .. Sun=7
  sys_days thursday = d + days{4 - static_cast<int>(iso_wd)};
  year y = year_month_day{thursday}.year();
  sys_days jan1 = sys_days{y / January / 1};
  int week = static_cast<int>((thursday - jan1).count() / 7) + 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-W%02d", static_cast<int>(y), week);
  return buf;
}

std::string month_key(TimePoint t, int offset_minutes) {
  year_month_day ymd{civil_day(t, offset_minutes)};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()));
  return buf;
}

}  // namespace km4

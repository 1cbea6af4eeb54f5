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

#include "km4/address.hpp"

#include <algorithm>
#include <sstream>

#include "km4/common.hpp"

namespace km4::address {

namespace {

// Street qualifiers ("dug") recognized at the head of a street name.
constexpr std::string_view kDugs[] = {
    "VIA",      "VIALE",     "PIAZZA",  "PIAZZALE", "PIAZZETTA", "CORSO",    "LARGO",
    "BORGO",    "VICOLO",    "STRADA",  "LOCALITA", "FRAZIONE",  "LUNGARNO", "VIUZZO",
    "SALITA",   "PONTE",     "CHIASSO", "VIOTTOLO", "LUNGOMARE", "PASSAGGIO", "GALLERIA",
    "TRAVERSA", "CIRCONVALLAZIONE",
};

struct SeedEntry {
  std::string_view variant;
  std::string_view canonical;
};

constexpr SeedEntry kSeed[] = {
    {"P.ZZA", "PIAZZA"},   {"P.ZA", "PIAZZA"},     {"PZA", "PIAZZA"},      {"PZZA", "PIAZZA"},
    {"P.LE", "PIAZZALE"},  {"PLE", "PIAZZALE"},    {"P.TTA", "PIAZZETTA"}, {"V.", "VIA"},
    {"V.LE", "VIALE"},     {"VLE", "VIALE"},       {"C.SO", "CORSO"},      {"CSO", "CORSO"},
    {"L.GO", "LARGO"},     {"LGO", "LARGO"},       {"B.GO", "BORGO"},      {"BGO", "BORGO"},
    {"V.LO", "VICOLO"},    {"VIC.", "VICOLO"},     {"STR.", "STRADA"},     {"LOC.", "LOCALITA"},
    {"FRAZ.", "FRAZIONE"}, {"L.NO", "LUNGARNO"},   {"S.", "SANTA"},        {"S", "SANTA"},
    {"S.TA", "SANTA"},     {"STA", "SANTA"},
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper_alnum(char c) { return (c >= 'A' && c <= 'Z') || is_digit(c); }

// Keeps [A-Z0-9] and, if asked, '.'.
std::string strip_noise(std::string_view token, bool keep_dots) {
  std::string out;
  for (char c : token) {
    if (is_upper_alnum(c) || (keep_dots && c == '.')) out.push_back(c);
  }
  return out;
}

int roman_value(char c) {
  switch (c) {
    case 'I': return 1;
    case 'V': return 5;
    case 'X': return 10;
    case 'L': return 50;
    case 'C': return 100;
    case 'D': return 500;
    case 'M': return 1000;
  }
  return 0;
}

}  // namespace

std::string_view to_string(CivicColor c) {
  switch (c) {
    case CivicColor::kBlack: return "black";
    case CivicColor::kRed: return "red";
    case CivicColor::kNone: return "none";
  }
  return "";
}

std::string NormalizedAddress::name() const { return join(name_tokens, " "); }

std::string NormalizedAddress::street() const {
  if (qualifier.empty()) return name();
  if (name_tokens.empty()) return qualifier;
  return qualifier + " " + name();
}

QualifierTable QualifierTable::seed() {
  QualifierTable t;
  for (auto d : kDugs) t.add_qualifier(d);
  for (const auto& e : kSeed) t.add(e.variant, e.canonical);
  return t;
}

QualifierTable QualifierTable::parse(std::string_view text) {
  QualifierTable t = seed();
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw_error(ErrorCode::kParse, "qualifier table line " + std::to_string(lineno) + ": expected 2 columns");
    }
    std::string variant = to_upper_ascii(trim(cols[0]));
    std::string canonical = to_upper_ascii(trim(cols[1]));
    if (variant == canonical) {
      t.add_qualifier(canonical);
    } else {
      t.add(variant, canonical);
    }
  }
  return t;
}

QualifierTable QualifierTable::load(const std::string& path) { return parse(read_file(path)); }

void QualifierTable::add(std::string_view variant, std::string_view canonical) {
  std::string v = to_upper_ascii(variant);
  std::string c = to_upper_ascii(canonical);
  if (v.empty() || c.empty()) throw_error(ErrorCode::kInvalidArgument, "empty qualifier table entry");
  if (entries_.count(c) || canonicals_.count(v)) {
    throw_error(ErrorCode::kInvalidArgument, "qualifier entry " + v + " -> " + c + " breaks canonical fixed points");
  }
  entries_[v] = c;
  canonicals_.insert(c);
}

void QualifierTable::add_qualifier(std::string_view canonical) {
  std::string c = to_upper_ascii(canonical);
  if (entries_.count(c)) throw_error(ErrorCode::kInvalidArgument, "qualifier " + c + " is already a variant");
  qualifiers_.insert(c);
  canonicals_.insert(c);
}

std::optional<std::string> QualifierTable::lookup(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string fold_accents(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == 0xC3 && i + 1 < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[i + 1]) & 0xDF;  // fold case of Latin-1 letters
      char base = 0;
      if (d >= 0x80 && d <= 0x85) base = 'A';
      else if (d == 0x87) base = 'C';
      else if (d >= 0x88 && d <= 0x8B) base = 'E';
      else if (d >= 0x8C && d <= 0x8F) base = 'I';
      else if (d == 0x91) base = 'N';
      else if (d >= 0x92 && d <= 0x96) base = 'O';
      else if (d >= 0x99 && d <= 0x9C) base = 'U';
      if (base) {
        out.push_back(base);
        ++i;
        continue;
      }
    }
    out.push_back(static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c));
  }
  return out;
}

std::string basic_fold(std::string_view s) {
  return join(split_whitespace(to_upper_ascii(s)), " ");
}

std::string expand_qualifiers(std::string_view s, const QualifierTable& table) {
  std::vector<std::string> out;
  for (const auto& tok : split_whitespace(fold_accents(s))) {
    auto hit = table.lookup(tok);
    out.push_back(hit ? *hit : tok);
  }
  return join(out, " ");
}

bool is_roman_numeral(std::string_view t) {
  if (t.empty() || t.size() > 9) return false;
  int total = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    int v = roman_value(t[i]);
    if (v == 0) return false;
    int next = i + 1 < t.size() ? roman_value(t[i + 1]) : 0;
    total += v < next ? -v : v;
  }
  if (total <= 0 || total >= 4000) return false;
  // Canonical spelling check: re-encode and compare.
  static constexpr std::pair<int, std::string_view> kParts[] = {
      {1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"}, {100, "C"}, {90, "XC"}, {50, "L"},
      {40, "XL"},  {10, "X"},   {9, "IX"},  {5, "V"},    {4, "IV"},  {1, "I"}};
  std::string enc;
  int rest = total;
  for (const auto& [v, sym] : kParts) {
    while (rest >= v) {
      enc += sym;
      rest -= v;
    }
  }
  return enc == t;
}

std::vector<CivicNumber> parse_civic(std::string_view s) {
  std::string t = basic_fold(s);
  CivicNumber absent{std::nullopt, "", CivicColor::kNone, false};
  std::string compact = strip_noise(t, false);
  if (compact.empty() || compact == "SNC" || compact == "SN" ||
      std::all_of(compact.begin(), compact.end(), [](char c) { return c == '0'; })) {
    if (compact.empty() && !t.empty()) {
      absent.flagged = true;
      absent.suffix = t;
    }
    return {absent};
  }

  // Ranges: "40/R-42/R" when every part starts with a digit.
  std::vector<std::string> parts;
  auto pieces = split(t, '-');
  bool range = pieces.size() > 1 && std::all_of(pieces.begin(), pieces.end(), [](const std::string& p) {
                 std::string q = trim(p);
                 return !q.empty() && is_digit(q[0]);
               });
  if (range) {
    for (const auto& p : pieces) parts.push_back(trim(p));
  } else {
    parts.push_back(t);
  }

  std::vector<CivicNumber> out;
  for (const auto& part : parts) {
    size_t i = 0;
    while (i < part.size() && is_digit(part[i])) ++i;
    if (i == 0) {
      out.push_back(CivicNumber{std::nullopt, part, CivicColor::kNone, true});
      continue;
    }
    int value = 0;
    bool overflow = false;
    for (size_t j = 0; j < i; ++j) {
      if (value > 100000000) overflow = true;
      value = value * 10 + (part[j] - '0');
    }
    // A trailing R or ROSSO token, set off by a space or slash, marks red.
    std::string tail = trim(part.substr(i));
    bool red = false;
    auto sep = tail.find_last_of(" /");
    std::string last = sep == std::string::npos ? tail : tail.substr(sep + 1);
    if (last == "R" || last == "ROSSO") {
      red = true;
      tail.resize(sep == std::string::npos ? 0 : sep);
    }
    std::string rest;
    for (char c : tail) {
      if (c != ' ') rest.push_back(c);
    }
    while (!rest.empty() && rest.front() == '/') rest.erase(rest.begin());
    while (!rest.empty() && rest.back() == '/') rest.pop_back();
    if (overflow || value == 0) {
      out.push_back(CivicNumber{std::nullopt, part, CivicColor::kNone, true});
      continue;
    }
    CivicNumber c{value, rest, red ? CivicColor::kRed : CivicColor::kBlack, false};
    out.push_back(c);
  }
  return out;
}

NormalizedAddress normalize(const RawAddress& raw, const QualifierTable& table) {
  NormalizedAddress out;
  std::vector<std::string> tokens = split_whitespace(fold_accents(raw.street));

  // Corner annotations: drop the marker and everything after it.
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string bare = strip_noise(tokens[i], true);
    if (bare == "ANG." || bare == "ANGOLO" || starts_with(bare, "ANG.")) {
      tokens.resize(i);
      out.flags.push_back("corner-stripped");
      break;
    }
  }

  std::vector<std::string> cleaned;
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string dotted = strip_noise(tokens[i], true);
    std::string bare = strip_noise(tokens[i], false);
    if (bare.empty()) continue;
    if (i > 0 && is_roman_numeral(bare)) {
      cleaned.push_back(bare);
      continue;
    }
    if (auto hit = table.lookup(dotted)) {
      cleaned.push_back(*hit);
    } else if (auto hit2 = table.lookup(bare)) {
      cleaned.push_back(*hit2);
    } else {
      cleaned.push_back(bare);
    }
  }
  // Expansion is one token per token, so the count never grows.
  if (!cleaned.empty() && table.is_qualifier(cleaned.front())) {
    out.qualifier = cleaned.front();
    out.name_tokens.assign(cleaned.begin() + 1, cleaned.end());
  } else {
    out.name_tokens = cleaned;
  }
  out.last_word_key = out.name_tokens.empty() ? "" : out.name_tokens.back();
  out.municipality = basic_fold(fold_accents(raw.municipality));
  out.civics = parse_civic(raw.civic);
  for (const auto& c : out.civics) {
    if (c.flagged) {
      out.flags.push_back("civic-unparsed");
      break;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> name_orderings(const NormalizedAddress& addr) {
  std::vector<std::vector<std::string>> out{addr.name_tokens};
  if (addr.name_tokens.size() >= 2) {
    auto swapped = addr.name_tokens;
    std::swap(swapped[swapped.size() - 1], swapped[swapped.size() - 2]);
    if (swapped != addr.name_tokens) out.push_back(std::move(swapped));
  }
  return out;
}

namespace {

bool is_cap(std::string_view t) { return t.size() == 5 && std::all_of(t.begin(), t.end(), is_digit); }

bool civic_start(std::string_view t) {
  std::string u = to_upper_ascii(t);
  return (!t.empty() && is_digit(t[0])) || u == "SNC" || u == "S.N.C.";
}

/// Trailing pieces of a civic written apart from the number.
bool civic_tail(std::string_view t) {
  std::string u = to_upper_ascii(t);
  return u == "R" || u == "/R" || u == "ROSSO" || u == "BIS" || u == "TER" ||
         (u.size() == 1 && u[0] >= 'A' && u[0] <= 'Z') || (u.size() == 2 && u[0] == '/');
}

}  // namespace

RawAddress split_address(std::string_view text) {
  RawAddress out;
  std::vector<std::string> tokens;
  std::vector<bool> part_start;
  for (const auto& part : split(text, ',')) {
    auto words = split_whitespace(part);
    for (size_t i = 0; i < words.size(); ++i) {
      tokens.push_back(words[i]);
      part_start.push_back(i == 0);
    }
  }
  size_t i = 0;
  std::vector<std::string> street, civic, muni;
  while (i < tokens.size() && !(i > 0 && civic_start(tokens[i]) && !is_cap(tokens[i]))) {
    if (i > 0 && is_cap(tokens[i])) break;
    street.push_back(tokens[i++]);
  }
  if (i < tokens.size() && !is_cap(tokens[i])) {
    civic.push_back(tokens[i++]);
    while (i < tokens.size() && !part_start[i] && civic_tail(tokens[i])) civic.push_back(tokens[i++]);
  }
  if (i < tokens.size() && is_cap(tokens[i])) out.cap = tokens[i++];
  while (i < tokens.size()) muni.push_back(tokens[i++]);
  out.street = join(street, " ");
  out.civic = join(civic, " ");
  out.municipality = join(muni, " ");
  return out;
}

std::string describe(const NormalizedAddress& a) {
  std::ostringstream os;
  os << "street: " << a.street() << '\n';
  os << "qualifier: " << (a.qualifier.empty() ? "-" : a.qualifier) << '\n';
  os << "name: " << join(a.name_tokens, " | ") << '\n';
  os << "lastWordKey: " << a.last_word_key << '\n';
  os << "municipality: " << a.municipality << '\n';
  for (const auto& c : a.civics) {
    os << "civic: " << (c.value ? std::to_string(*c.value) : "absent") << " color=" << to_string(c.color);
    if (!c.suffix.empty()) os << " suffix=" << c.suffix;
    if (c.flagged) os << " flagged";
    os << '\n';
  }
  if (!a.flags.empty()) os << "flags: " << join(a.flags, ",") << '\n';
  return os.str();
}

}  // namespace km4::address

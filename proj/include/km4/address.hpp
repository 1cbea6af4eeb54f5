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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace km4::address {

enum class CivicColor { kBlack, kRed, kNone };

std::string_view to_string(CivicColor c);

struct CivicNumber {
  /// Absent for SNC, "0", empty and unparseable input.
  std::optional<int> value;
  std::string suffix;
  CivicColor color = CivicColor::kNone;
  /// Set when the text could not be parsed; the residue is kept in suffix.
  bool flagged = false;

  /// Matching key: value and color only.
  bool same_number(const CivicNumber& other) const {
    return value && other.value && *value == *other.value && color == other.color;
  }

  friend bool operator==(const CivicNumber&, const CivicNumber&) = default;
};

struct RawAddress {
  std::string street;
  std::string civic;
  std::string municipality;
  std::optional<std::string> cap;
};

struct NormalizedAddress {
  std::string qualifier;
  std::vector<std::string> name_tokens;
  std::vector<CivicNumber> civics;
  std::string municipality;
  std::string last_word_key;
  std::vector<std::string> flags;

  std::string name() const;
  /// Qualifier and name as one string.
  std::string street() const;

  friend bool operator==(const NormalizedAddress&, const NormalizedAddress&) = default;
};

/// Variant to canonical token table for street qualifiers and common
/// abbreviations (P.ZZA -> PIAZZA, S. -> SANTA).
class QualifierTable {
 public:
  /// Built-in entries.
  static QualifierTable seed();
  /// Seed plus `variant<TAB>canonical` lines; a line whose variant equals
  /// its canonical form declares an extra street qualifier.
  static QualifierTable parse(std::string_view text);
  static QualifierTable load(const std::string& path);

  /// Throws Error(kInvalidArgument) if the entry would break the fixed-point
  /// property (canonical forms must not themselves be variants).
  void add(std::string_view variant, std::string_view canonical);
  void add_qualifier(std::string_view canonical);

  std::optional<std::string> lookup(std::string_view token) const;
  bool is_qualifier(std::string_view token) const { return qualifiers_.count(std::string(token)) > 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::set<std::string> canonicals_;
  std::set<std::string> qualifiers_;
};

/// Folds Italian accented letters to unaccented uppercase ASCII.
std::string fold_accents(std::string_view s);

/// Uppercase, trim and collapse internal whitespace.
std::string basic_fold(std::string_view s);

/// Replaces variant tokens by their canonical form; uppercases. Idempotent.
std::string expand_qualifiers(std::string_view s, const QualifierTable& table);

/// Never throws; always returns at least one element.
std::vector<CivicNumber> parse_civic(std::string_view s);

NormalizedAddress normalize(const RawAddress& raw, const QualifierTable& table);

/// Original token order plus the swap of the last two name tokens.
std::vector<std::vector<std::string>> name_orderings(const NormalizedAddress& addr);

bool is_roman_numeral(std::string_view token);

/// Splits one free-text address ("Via Roma 12/r, 50100 Firenze") into
/// street, civic, CAP and municipality. Commas separate parts when
/// present; otherwise the first token starting with a digit opens the
/// civic and a five-digit token is the CAP.
RawAddress split_address(std::string_view text);

/// Human-readable structure listing used by the CLI.
std::string describe(const NormalizedAddress& addr);

}  // namespace km4::address

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

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace km4 {

/// Absolute identifier: a scheme followed by ':' and no whitespace or
/// angle brackets.
class Iri {
 public:
  Iri() = default;
  /// Throws Error(kInvalidArgument) on a malformed value.
  explicit Iri(std::string value);

  static bool is_valid(std::string_view value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend bool operator==(const Iri&, const Iri&) = default;
  friend auto operator<=>(const Iri&, const Iri&) = default;

 private:
  std::string value_;
};

enum class Datatype { kString, kInteger, kDecimal, kDateTime, kBoolean };

std::string_view datatype_iri(Datatype dt);
std::optional<Datatype> datatype_from_iri(std::string_view iri);
std::optional<Datatype> datatype_from_name(std::string_view name);
std::string_view datatype_name(Datatype dt);

struct Literal {
  std::string lexical;
  Datatype datatype = Datatype::kString;

  /// Checks that `lexical` parses under `datatype`.
  static bool is_valid(std::string_view lexical, Datatype dt);
  /// Validating constructor.
  static Literal make(std::string lexical, Datatype dt);

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Object position of a quad: an IRI or a typed literal.
class Term {
 public:
  enum class Kind { kIri, kLiteral };

  Term() = default;
  Term(Iri iri);  // NOLINT(google-explicit-constructor)
  Term(Literal lit);  // NOLINT(google-explicit-constructor)

  static Term iri(std::string value) { return Term(Iri(std::move(value))); }
  static Term literal(std::string lexical, Datatype dt = Datatype::kString) {
    return Term(Literal::make(std::move(lexical), dt));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == Kind::kIri; }
  bool is_literal() const noexcept { return kind_ == Kind::kLiteral; }
  /// IRI text or literal lexical form.
  const std::string& value() const noexcept { return value_; }
  Datatype datatype() const noexcept { return datatype_; }

  Iri as_iri() const;
  Literal as_literal() const;

  /// N-Quads rendering: `<iri>` or `"lex"^^<datatype>`.
  std::string to_nquads() const;

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  Kind kind_ = Kind::kIri;
  std::string value_;
  Datatype datatype_ = Datatype::kString;
};

struct Quad {
  Iri subject;
  Iri predicate;
  Term object;
  Iri context;

  friend bool operator==(const Quad&, const Quad&) = default;
  friend std::strong_ordering operator<=>(const Quad& a, const Quad& b);
};

Quad make_quad(std::string_view s, std::string_view p, Term o, std::string_view c);

/// One statement, `<s> <p> <o> <c> .`, without the trailing newline.
std::string to_nquads_line(const Quad& q);
/// Statements joined with LF, each line terminated.
std::string to_nquads(const std::vector<Quad>& quads);

/// Parses one line; throws Error(kParse) with the reason on failure.
Quad parse_nquads_line(std::string_view line);
/// Parses a document; blank lines and `#` comments are skipped.
std::vector<Quad> parse_nquads(std::string_view text);

struct TermHash {
  size_t operator()(const Term& t) const noexcept;
};

}  // namespace km4
